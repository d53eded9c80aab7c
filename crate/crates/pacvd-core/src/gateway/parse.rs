//! Binary verdict parsing.
//!
//! Case-insensitive: the first alphabetic token decides when the opposite
//! label is absent from the first sentence; otherwise exactly one of
//! yes/no standing alone in the first sentence decides; anything else is
//! unparseable. "yes and no depending..." is therefore unparseable even
//! though it starts with "yes".

use super::VerdictLabel;

fn alphabetic_tokens(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphabetic())
        .filter(|t| !t.is_empty())
        .map(|t| t.to_ascii_lowercase())
}

pub fn parse_verdict(text: &str) -> VerdictLabel {
    let first_sentence_end = text
        .char_indices()
        .find(|(_, c)| matches!(c, '.' | '!' | '?'))
        .map(|(i, _)| i)
        .unwrap_or(text.len());
    let first_sentence = &text[..first_sentence_end];

    let mut has_yes = false;
    let mut has_no = false;
    for tok in alphabetic_tokens(first_sentence) {
        match tok.as_str() {
            "yes" => has_yes = true,
            "no" => has_no = true,
            _ => {}
        }
    }
    let first_token = alphabetic_tokens(text).next();
    match first_token.as_deref() {
        Some("yes") if !has_no => return VerdictLabel::Yes,
        Some("no") if !has_yes => return VerdictLabel::No,
        _ => {}
    }
    match (has_yes, has_no) {
        (true, false) => VerdictLabel::Yes,
        (false, true) => VerdictLabel::No,
        _ => VerdictLabel::Unparseable,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn leading_yes() {
        assert_eq!(
            parse_verdict("Yes, this code is vulnerable to a double free."),
            VerdictLabel::Yes
        );
        assert_eq!(parse_verdict("yes"), VerdictLabel::Yes);
        assert_eq!(
            parse_verdict("yes, double free on srp->rq"),
            VerdictLabel::Yes
        );
    }

    #[test]
    fn leading_no() {
        assert_eq!(parse_verdict("no"), VerdictLabel::No);
        assert_eq!(parse_verdict("No. The function is safe."), VerdictLabel::No);
    }

    #[test]
    fn verdict_inside_first_sentence() {
        assert_eq!(parse_verdict("The answer is yes."), VerdictLabel::Yes);
        assert_eq!(parse_verdict("I would say no here."), VerdictLabel::No);
    }

    #[test]
    fn both_tokens_in_first_sentence_is_unparseable() {
        assert_eq!(
            parse_verdict("yes and no depending on the caller."),
            VerdictLabel::Unparseable
        );
    }

    #[test]
    fn hedging_is_unparseable() {
        assert_eq!(
            parse_verdict("It depends on the caller."),
            VerdictLabel::Unparseable
        );
        assert_eq!(parse_verdict(""), VerdictLabel::Unparseable);
    }

    #[test]
    fn later_sentences_do_not_count() {
        assert_eq!(
            parse_verdict("Hard to say. yes maybe."),
            VerdictLabel::Unparseable
        );
        assert_eq!(
            parse_verdict("Yes. No issues beyond that."),
            VerdictLabel::Yes
        );
    }

    #[test]
    fn words_containing_labels_do_not_count() {
        assert_eq!(
            parse_verdict("Yesterday's build is noisy."),
            VerdictLabel::Unparseable
        );
    }
}
