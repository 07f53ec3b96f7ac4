//! Writes a seeded Afrikaans-like corpus built from sentence templates.
//!
//! ```text
//! cargo run -p lynwerk-core --example synth_corpus -- 2000 7 > fixtures/synthetic_2000.txt
//! ```

use lynwerk_core::numerics::Rng;

const NOUNS: &[&str] = &[
    "see", "wind", "maan", "son", "berg", "rivier", "veld", "huis", "venster", "deur", "boom", "voël", "hond", "kind",
    "vrou", "man", "stad", "dorp", "pad", "brug", "wolk", "reën", "ster", "nag", "oggend", "aand", "skaduwee", "stem",
    "hand", "hart", "droom", "kerk", "stoep", "tuin", "klip", "golf", "blom", "vuur", "rook", "spieël", "brief", "trein",
    "hemel", "aarde", "lig", "stilte", "klok", "muur", "gras", "dam",
];
const ADJECTIVES: &[&str] = &[
    "ou", "jong", "stil", "donker", "helder", "koue", "warm", "leë", "vol", "verre", "naby", "sagte", "harde", "bleek",
    "rooi", "blou", "groen", "grys", "swart", "wit", "eensame", "stowwerige", "nat", "droë", "vreemde", "bekende",
    "gebroke", "nuwe", "skaam", "wilde",
];
const VERBS: &[&str] = &[
    "slaap", "wag", "sing", "huil", "lag", "val", "brand", "fluister", "roep", "dans", "draai", "breek", "bewe", "skyn",
    "loop", "rus", "praat", "luister", "onthou", "vergeet", "bid", "dwaal", "glim", "sterf", "groei", "wonder", "hunker",
    "kraak", "ruis", "swyg",
];
const TRANSITIVE: &[&str] = &[
    "sien", "soek", "dra", "hou", "vind", "mis", "roep", "volg", "skryf", "teken", "hoor", "ken", "meet", "tel",
    "bewaar", "verloor",
];
const PREPOSITIONS: &[&str] = &["in", "op", "oor", "onder", "by", "agter", "langs", "deur", "teen", "tussen", "voor", "na"];
const ADVERBS: &[&str] = &[
    "stadig", "weer", "altyd", "nooit", "sag", "lank", "vroeg", "laat", "skielik", "amper", "net", "steeds", "vanaand",
    "môre", "gister",
];
const PRONOUNS: &[&str] = &["ek", "jy", "hy", "sy", "ons", "julle", "hulle"];
const POSSESSIVES: &[&str] = &["my", "jou", "sy", "haar", "ons", "hul"];
const DETERMINERS: &[&str] = &["die", "die", "die", "’n", "elke", "daardie"];

fn pick<'a>(rng: &mut Rng, words: &[&'a str]) -> &'a str {
    words[rng.below(words.len() as u64) as usize]
}

fn noun_phrase(rng: &mut Rng, out: &mut Vec<String>) {
    let det = if rng.below(4) == 0 { pick(rng, POSSESSIVES) } else { pick(rng, DETERMINERS) };
    out.push(det.to_owned());
    if rng.below(2) == 0 {
        out.push(pick(rng, ADJECTIVES).to_owned());
    }
    out.push(pick(rng, NOUNS).to_owned());
}

fn prepositional(rng: &mut Rng, out: &mut Vec<String>) {
    out.push(pick(rng, PREPOSITIONS).to_owned());
    noun_phrase(rng, out);
}

fn sentence(rng: &mut Rng) -> String {
    let mut w = Vec::new();
    match rng.below(6) {
        0 => {
            noun_phrase(rng, &mut w);
            w.push(pick(rng, VERBS).to_owned());
            prepositional(rng, &mut w);
        }
        1 => {
            w.push(pick(rng, PRONOUNS).to_owned());
            w.push(pick(rng, TRANSITIVE).to_owned());
            noun_phrase(rng, &mut w);
            w.push(pick(rng, ADVERBS).to_owned());
        }
        2 => {
            prepositional(rng, &mut w);
            w.push(pick(rng, VERBS).to_owned());
            noun_phrase(rng, &mut w);
        }
        3 => {
            noun_phrase(rng, &mut w);
            w.push(pick(rng, ADVERBS).to_owned());
            w.push(pick(rng, VERBS).to_owned());
            w.push("en".to_owned());
            noun_phrase(rng, &mut w);
            w.push(pick(rng, VERBS).to_owned());
        }
        4 => {
            w.push(pick(rng, PRONOUNS).to_owned());
            w.push(pick(rng, VERBS).to_owned());
            w.push(pick(rng, ADVERBS).to_owned());
            prepositional(rng, &mut w);
        }
        _ => {
            noun_phrase(rng, &mut w);
            w.push("is".to_owned());
            w.push(pick(rng, ADJECTIVES).to_owned());
            w.push("soos".to_owned());
            noun_phrase(rng, &mut w);
        }
    }
    let mut text = w.join(" ");
    if let Some(first) = text.chars().next() {
        text.replace_range(..first.len_utf8(), &first.to_uppercase().to_string());
    }
    text.push(if rng.below(8) == 0 { '?' } else { '.' });
    text
}

fn main() {
    let mut args = std::env::args().skip(1);
    let lines: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(2000);
    let seed: u64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(7);
    let mut rng = Rng::seed_from(seed);
    for _ in 0..lines {
        println!("{}", sentence(&mut rng));
    }
}
