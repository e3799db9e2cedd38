/// Lowercases, joins contractions (`i'm` → `im`), keeps decimal points
/// between digits, splits `£` into its own token and turns every other
/// non-alphanumeric character into a space. Tokens are joined by single
/// spaces, so `normalize(normalize(t)) == normalize(t)`.
pub fn normalize(text: &str) -> String {
    let chars: Vec<char> = text.chars().flat_map(char::to_lowercase).collect();
    let mut out = String::with_capacity(chars.len());
    for (i, &c) in chars.iter().enumerate() {
        let prev = i.checked_sub(1).map(|j| chars[j]);
        let next = chars.get(i + 1).copied();
        match c {
            c if c.is_alphanumeric() => out.push(c),
            '\'' | '\u{2019}' => {}
            '.' if prev.is_some_and(|p| p.is_ascii_digit()) && next.is_some_and(|n| n.is_ascii_digit()) => {
                out.push('.')
            }
            '£' => {
                out.push(' ');
                out.push('£');
                out.push(' ');
            }
            _ => out.push(' '),
        }
    }
    out.split_whitespace().collect::<Vec<_>>().join(" ")
}

pub fn tokens(text: &str) -> Vec<String> {
    normalize(text).split(' ').filter(|t| !t.is_empty()).map(str::to_string).collect()
}

/// Integer or decimal literal as produced by [`normalize`].
pub fn is_number(token: &str) -> bool {
    let mut parts = token.split('.');
    let int = parts.next().unwrap_or("");
    let frac = parts.next();
    parts.next().is_none()
        && !int.is_empty()
        && int.bytes().all(|b| b.is_ascii_digit())
        && frac.is_none_or(|f| !f.is_empty() && f.bytes().all(|b| b.is_ascii_digit()))
}
