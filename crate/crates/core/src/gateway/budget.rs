//! Token counting and budget enforcement.
//!
//! The default tokenizer is an upper-bound estimate (`ceil(chars / 4)`);
//! exact vendor tokenization is a backend detail and budget enforcement only
//! needs a conservative count. Implementations must keep `prefix` consistent
//! with `count`: the returned prefix ends at a token boundary.

use super::GatewayError;

pub trait Tokenizer: Send + Sync {
    fn count(&self, text: &str) -> usize;
    /// Longest prefix of `text` spanning at most `max_tokens` tokens.
    fn prefix<'a>(&self, text: &'a str, max_tokens: usize) -> &'a str;
}

/// One token per four characters, rounded up.
pub struct ApproxTokenizer;

impl Tokenizer for ApproxTokenizer {
    fn count(&self, text: &str) -> usize {
        text.chars().count().div_ceil(4)
    }

    fn prefix<'a>(&self, text: &'a str, max_tokens: usize) -> &'a str {
        let max_chars = max_tokens.saturating_mul(4);
        match text.char_indices().nth(max_chars) {
            Some((byte, _)) => &text[..byte],
            None => text,
        }
    }
}

/// Truncate `text` to at most `budget_tokens` tokens at a token boundary;
/// text already within budget is returned unchanged.
pub fn truncate_to_budget(
    text: &str,
    budget_tokens: usize,
    tokenizer: &dyn Tokenizer,
) -> Result<String, GatewayError> {
    if budget_tokens == 0 {
        return Err(GatewayError::ZeroBudget);
    }
    if tokenizer.count(text) <= budget_tokens {
        return Ok(text.to_string());
    }
    Ok(tokenizer.prefix(text, budget_tokens).to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn count_rounds_up() {
        let t = ApproxTokenizer;
        assert_eq!(t.count(""), 0);
        assert_eq!(t.count("abc"), 1);
        assert_eq!(t.count("abcd"), 1);
        assert_eq!(t.count("abcde"), 2);
    }

    #[test]
    fn within_budget_is_unchanged() {
        let t = ApproxTokenizer;
        let text = "short text";
        assert_eq!(truncate_to_budget(text, 100, &t).unwrap(), text);
    }

    #[test]
    fn over_budget_takes_token_prefix() {
        let t = ApproxTokenizer;
        // 400 chars = 100 tokens; budget 10 -> first 40 chars.
        let text: String = std::iter::repeat('x').take(400).collect();
        let cut = truncate_to_budget(&text, 10, &t).unwrap();
        assert_eq!(cut.chars().count(), 40);
        assert!(text.starts_with(&cut));
        assert_eq!(t.count(&cut), 10);
    }

    #[test]
    fn zero_budget_is_rejected() {
        let t = ApproxTokenizer;
        assert!(matches!(
            truncate_to_budget("x", 0, &t),
            Err(GatewayError::ZeroBudget)
        ));
    }

    #[test]
    fn prefix_respects_multibyte_boundaries() {
        let t = ApproxTokenizer;
        let text = "áéíóú".repeat(10); // 50 chars
        let cut = truncate_to_budget(&text, 3, &t).unwrap();
        assert_eq!(cut.chars().count(), 12);
        assert!(text.starts_with(&cut));
    }
}
