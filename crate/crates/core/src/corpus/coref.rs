use std::fmt;

use log::warn;

use super::{pos, Story};

/// A pronoun whose chain offered no nominal antecedent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorefWarning {
    pub story: String,
    pub chain: String,
    pub sentence: usize,
    pub token: usize,
}

impl fmt::Display for CorefWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "story `{}`: coreference chain `{}` has no nominal mention (pronoun at sentence {}, token {})",
            self.story, self.chain, self.sentence, self.token
        )
    }
}

/// Replaces pronominal dependent lemmas with the lemma of the closest
/// preceding nominal member of the same coreference chain. A chain whose
/// nominal members all follow the pronoun resolves to the first of them;
/// a chain without nominal members leaves the lemma unchanged.
pub fn resolve_pronouns(story: &Story) -> (Story, Vec<CorefWarning>) {
    let mut out = story.clone();
    let mut warnings = Vec::new();
    for mention in &mut out.mentions {
        let s = mention.sentence;
        for dep in &mut mention.dependents {
            let Some(tok) = story.token(s, dep.token) else {
                continue;
            };
            let (true, Some(chain)) = (pos::is_pronoun(&tok.pos), tok.coref.as_deref()) else {
                continue;
            };
            let here = (s, dep.token);
            let nominal: Vec<((usize, usize), &str)> = story
                .sentences
                .iter()
                .enumerate()
                .flat_map(|(si, sent)| sent.iter().map(move |t| (si, t)))
                .filter(|(_, t)| t.coref.as_deref() == Some(chain) && pos::is_nominal(&t.pos))
                .map(|(si, t)| ((si, t.index), t.lemma.as_str()))
                .collect();
            let antecedent = nominal
                .iter()
                .rev()
                .find(|(p, _)| *p < here)
                .or_else(|| nominal.first());
            match antecedent {
                Some((_, lemma)) => dep.lemma = lemma.to_string(),
                None => {
                    let w = CorefWarning {
                        story: story.id.clone(),
                        chain: chain.to_string(),
                        sentence: s,
                        token: dep.token,
                    };
                    warn!("{w}");
                    warnings.push(w);
                }
            }
        }
    }
    (out, warnings)
}
