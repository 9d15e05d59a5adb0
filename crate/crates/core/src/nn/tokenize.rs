/// Lowercases and splits text into word and punctuation tokens.
///
/// Punctuation inside a number (`50,000`, `3.5`, `1965-12-04`, `12/25`)
/// stays part of the token; anywhere else each punctuation character is a
/// token of its own.
pub fn tokenize(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.chars().flat_map(char::to_lowercase).collect();
    let mut tokens = Vec::new();
    let mut current = String::new();
    for (i, &c) in chars.iter().enumerate() {
        if c.is_whitespace() {
            if !current.is_empty() {
                tokens.push(std::mem::take(&mut current));
            }
        } else if c.is_alphanumeric() {
            current.push(c);
        } else {
            let inside_number = matches!(c, '.' | ',' | '-' | '/' | ':')
                && i > 0
                && chars[i - 1].is_ascii_digit()
                && chars.get(i + 1).is_some_and(|n| n.is_ascii_digit())
                && current.chars().all(|ch| ch.is_ascii_digit() || ".,-/:".contains(ch));
            if inside_number {
                current.push(c);
            } else {
                if !current.is_empty() {
                    tokens.push(std::mem::take(&mut current));
                }
                tokens.push(c.to_string());
            }
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}
