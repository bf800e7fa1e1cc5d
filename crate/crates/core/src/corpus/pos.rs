//! Tag-set helpers. Both Universal Dependencies and Penn Treebank coarse tags
//! are recognised.

pub fn is_verbal(pos: &str) -> bool {
    matches!(pos, "VERB" | "AUX" | "MD") || pos.starts_with("VB")
}

pub fn is_nominal(pos: &str) -> bool {
    matches!(pos, "NOUN" | "PROPN") || pos.starts_with("NN")
}

pub fn is_pronoun(pos: &str) -> bool {
    matches!(pos, "PRON" | "PRP" | "PRP$" | "WP" | "WP$")
}

pub fn is_modal(pos: &str) -> bool {
    pos == "MD"
}

pub fn is_punctuation(pos: &str) -> bool {
    pos == "PUNCT" || pos.chars().all(|c| c.is_ascii_punctuation())
}

/// `nmod:poss` -> `nmod`.
pub fn base_relation(deprel: &str) -> &str {
    deprel.split(':').next().unwrap_or(deprel)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tag_classes() {
        assert!(is_verbal("VBD") && is_verbal("VERB") && is_verbal("MD"));
        assert!(!is_verbal("NOUN"));
        assert!(is_nominal("NNS") && is_nominal("PROPN"));
        assert!(is_pronoun("PRP") && !is_pronoun("NOUN"));
        assert!(is_punctuation(".") && is_punctuation("PUNCT") && !is_punctuation("NN"));
        assert_eq!(base_relation("obl:tmod"), "obl");
        assert_eq!(base_relation("dobj"), "dobj");
    }
}
