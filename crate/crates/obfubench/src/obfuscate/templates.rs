//! Prompt template assets.
//!
//! A template directory holds `system.txt`, `user.txt`, an optional
//! `intro.txt` and `exemplars/NN_original.py` with matching
//! `NN_obfuscated.py` files. The shipped defaults are compiled in.

use std::fs;
use std::io;
use std::path::Path;

use obfubench_core::prompt::{Exemplar, PromptTemplate, DEFAULT_EXEMPLAR_INTRO};
use obfubench_core::Regime;

pub const DEFAULT_EXEMPLAR_COUNT: usize = 2;

const SYSTEM: &str = include_str!("../../assets/templates/system.txt");
const USER: &str = include_str!("../../assets/templates/user.txt");
const INTRO: &str = include_str!("../../assets/templates/intro.txt");
const EXEMPLARS: &[(&str, &str)] = &[
    (
        include_str!("../../assets/templates/exemplars/01_original.py"),
        include_str!("../../assets/templates/exemplars/01_obfuscated.py"),
    ),
    (
        include_str!("../../assets/templates/exemplars/02_original.py"),
        include_str!("../../assets/templates/exemplars/02_obfuscated.py"),
    ),
];

fn assemble(regime: Regime, system: &str, user: &str, intro: &str, pool: Vec<Exemplar>, k: usize) -> PromptTemplate {
    PromptTemplate {
        regime,
        system_text: system.trim_end().into(),
        user_text: user.trim_end().into(),
        exemplars: match regime {
            Regime::ZeroShot => Vec::new(),
            Regime::FewShot => pool.into_iter().take(k).collect(),
        },
        exemplar_intro: intro.trim_end().into(),
    }
}

pub fn default_template(regime: Regime, exemplar_count: usize) -> PromptTemplate {
    let pool = EXEMPLARS
        .iter()
        .map(|(o, b)| Exemplar {
            original: (*o).into(),
            obfuscated: (*b).into(),
        })
        .collect();
    assemble(regime, SYSTEM, USER, INTRO, pool, exemplar_count)
}

pub fn load_template(dir: &Path, regime: Regime, exemplar_count: usize) -> io::Result<PromptTemplate> {
    let system = fs::read_to_string(dir.join("system.txt"))?;
    let user = fs::read_to_string(dir.join("user.txt"))?;
    let intro = fs::read_to_string(dir.join("intro.txt")).unwrap_or_else(|_| DEFAULT_EXEMPLAR_INTRO.into());
    let mut originals: Vec<_> = match fs::read_dir(dir.join("exemplars")) {
        Ok(entries) => entries
            .filter_map(Result::ok)
            .map(|e| e.path())
            .filter(|p| p.to_string_lossy().ends_with("_original.py"))
            .collect(),
        Err(_) => Vec::new(),
    };
    originals.sort();
    let mut pool = Vec::with_capacity(originals.len());
    for path in originals {
        let partner = path.to_string_lossy().replace("_original.py", "_obfuscated.py");
        pool.push(Exemplar {
            original: fs::read_to_string(&path)?,
            obfuscated: fs::read_to_string(partner)?,
        });
    }
    Ok(assemble(regime, &system, &user, &intro, pool, exemplar_count))
}
