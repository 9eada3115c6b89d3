//! Query and passage tokenization: lowercase, Unicode-aware, no stemming.
//!
//! A token is a maximal run of alphanumeric scalars (per Unicode categories,
//! so accented Portuguese letters count), lowercased. Deterministic by
//! construction.

pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    for c in text.chars() {
        if c.is_alphanumeric() {
            current.extend(c.to_lowercase());
        } else if !current.is_empty() {
            tokens.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splits_on_punctuation_and_lowercases() {
        assert_eq!(
            tokenize("Contrato nº 42, ASSINADO."),
            vec!["contrato", "nº", "42", "assinado"]
        );
    }

    #[test]
    fn keeps_accented_letters() {
        assert_eq!(tokenize("representação às 10h"), vec!["representação", "às", "10h"]);
    }

    #[test]
    fn empty_and_symbol_only() {
        assert!(tokenize("").is_empty());
        assert!(tokenize("--- !!! ...").is_empty());
    }
}
