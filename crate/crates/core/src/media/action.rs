use std::collections::HashSet;

pub const MAX_ACTION_TOKENS: usize = 6;

/// Imperative verbs that start an action phrase.
pub const DEFAULT_VERBS: &[&str] = &[
    "add", "apply", "arrange", "assemble", "attach", "bake", "baste", "beat", "blend", "boil",
    "braise", "bring", "broil", "brown", "brush", "carve", "chill", "chop", "clamp", "clean",
    "coat", "combine", "cook", "cool", "cover", "crack", "crimp", "crumble", "crush", "cut",
    "dice", "dig", "dip", "dissolve", "drain", "drill", "drizzle", "dust", "fill", "flip",
    "fold", "fry", "garnish", "glaze", "glue", "grate", "grease", "grill", "grind", "hammer",
    "hang", "heat", "install", "julienne", "knead", "layer", "level", "line", "marinate",
    "mark", "mash", "measure", "melt", "mince", "mix", "mount", "nail", "paint", "peel", "plant",
    "poach", "pour", "preheat", "press", "prime", "prune", "puree", "reduce", "remove",
    "rinse", "roast", "roll", "rub", "sand", "saute", "sauté", "saw", "scoop", "scrape",
    "scrub", "seal", "sear", "season", "serve", "sew", "shape", "shred", "sift", "simmer",
    "skewer", "slice", "smooth", "soak", "spread", "sprinkle", "squeeze", "steam", "stir",
    "strain", "stuff", "tape", "tighten", "toast", "toss", "transfer", "trim", "unscrew",
    "wash", "whip", "whisk", "wipe", "wrap", "zest",
];

const CONJUNCTIONS: &[&str] = &["and", "then", "or", "but"];

#[derive(Debug, PartialEq, Eq)]
enum Tok {
    Word(String),
    Boundary,
}

/// Lowercased words with clause boundaries (`,;:()` and sentence ends).
fn lex(text: &str) -> Vec<Tok> {
    let mut out = Vec::new();
    let mut word = String::new();
    for c in text.chars() {
        if c.is_alphanumeric() || c == '\'' {
            word.extend(c.to_lowercase());
            continue;
        }
        if !word.is_empty() {
            out.push(Tok::Word(std::mem::take(&mut word)));
        }
        if matches!(c, ',' | ';' | ':' | '.' | '!' | '?' | '(' | ')') {
            out.push(Tok::Boundary);
        }
    }
    if !word.is_empty() {
        out.push(Tok::Word(word));
    }
    out
}

fn first_sentence(text: &str) -> &str {
    let mut it = text.char_indices().peekable();
    while let Some((i, c)) = it.next() {
        if matches!(c, '.' | '!' | '?') && it.peek().is_none_or(|(_, n)| n.is_whitespace()) {
            return &text[..i + c.len_utf8()];
        }
    }
    text
}

/// Pulls a short "verb object" phrase out of step text.
#[derive(Debug, Clone)]
pub struct ActionExtractor {
    verbs: HashSet<String>,
}

impl Default for ActionExtractor {
    fn default() -> Self {
        Self::new(DEFAULT_VERBS.iter().copied())
    }
}

impl ActionExtractor {
    pub fn new<'a>(verbs: impl IntoIterator<Item = &'a str>) -> Self {
        ActionExtractor { verbs: verbs.into_iter().map(str::to_lowercase).collect() }
    }

    /// From the first lexicon verb in the first sentence up to the next
    /// clause boundary or conjunction, at most six words. Without a verb,
    /// the first six words of the text.
    pub fn extract(&self, text: &str) -> String {
        let toks = lex(first_sentence(text));
        let start = toks
            .iter()
            .position(|t| matches!(t, Tok::Word(w) if self.verbs.contains(w)));
        let whole;
        let words: Vec<&str> = match start {
            Some(i) => {
                let mut phrase = Vec::new();
                for t in &toks[i..] {
                    match t {
                        Tok::Word(w) if phrase.is_empty() || !CONJUNCTIONS.contains(&w.as_str()) => {
                            phrase.push(w.as_str())
                        }
                        _ => break,
                    }
                    if phrase.len() == MAX_ACTION_TOKENS {
                        break;
                    }
                }
                phrase
            }
            None => {
                whole = lex(text);
                whole
                    .iter()
                    .filter_map(|t| match t {
                        Tok::Word(w) => Some(w.as_str()),
                        Tok::Boundary => None,
                    })
                    .take(MAX_ACTION_TOKENS)
                    .collect()
            }
        };
        words.join(" ")
    }
}

pub fn extract_action(text: &str) -> String {
    ActionExtractor::default().extract(text)
}
