//! Plain-text specification files: an optional atom list plus either a
//! single formula or a safety/guarantee pair.
//!
//! ```text
//! # lines starting with # are comments
//! atoms: o1 o2 o3 target out
//! safe: !(o1 | o2 | o3) W target
//! guarantee: target
//! ```
//!
//! Alternatively a single `formula:` line carries the whole objective
//! (for pure safety monitors or an explicit `... & <> atom` conjunction).

use anyhow::{anyhow, bail, Result};
use safesynth::ltl::parse_formula;
use safesynth::{Alphabet, Formula};

#[derive(Debug)]
pub struct SpecFile {
    pub alphabet: Alphabet,
    /// The full objective, guarantee folded in as `safe & <> guarantee`.
    pub formula: Formula,
    pub guarantee: Option<String>,
}

pub fn parse_spec_file(text: &str, system_alphabet: Option<&Alphabet>) -> Result<SpecFile> {
    let mut atoms: Option<Vec<String>> = None;
    let mut formula_src: Option<String> = None;
    let mut safe_src: Option<String> = None;
    let mut guarantee: Option<String> = None;

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, rest) = line
            .split_once(':')
            .ok_or_else(|| anyhow!("spec line {}: expected `key: value`", lineno + 1))?;
        let rest = rest.trim().to_string();
        match key.trim() {
            "atoms" => atoms = Some(rest.split_whitespace().map(String::from).collect()),
            "formula" => formula_src = Some(rest),
            "safe" => safe_src = Some(rest),
            "guarantee" => guarantee = Some(rest),
            other => bail!("spec line {}: unknown key `{other}`", lineno + 1),
        }
    }

    let alphabet = match (system_alphabet, &atoms) {
        (Some(sys), declared) => {
            if let Some(names) = declared {
                for n in names {
                    if sys.bit(n).is_none() {
                        bail!("spec declares atom `{n}` that the system does not output");
                    }
                }
            }
            sys.clone()
        }
        (None, Some(names)) => Alphabet::new(names.iter().map(String::as_str))?,
        (None, None) => bail!("spec file needs an `atoms:` line when no system provides one"),
    };

    let formula = match (formula_src, safe_src, &guarantee) {
        (Some(src), None, None) => parse_formula(&src, &alphabet)?,
        (None, Some(src), g) => {
            let safe = parse_formula(&src, &alphabet)?;
            match g {
                None => safe,
                Some(atom) => {
                    if alphabet.bit(atom).is_none() {
                        bail!("guarantee `{atom}` must be a single declared atom");
                    }
                    Formula::and(safe, Formula::eventually(Formula::atom(atom.clone()), atom))
                }
            }
        }
        (Some(_), _, Some(_)) | (Some(_), Some(_), _) => {
            bail!("spec file mixes `formula:` with `safe:`/`guarantee:` lines")
        }
        (None, None, _) => bail!("spec file needs a `formula:` or `safe:` line"),
    };

    Ok(SpecFile {
        alphabet,
        formula,
        guarantee,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn safe_guarantee_pair_builds_conjunction() {
        let spec = parse_spec_file(
            "atoms: p q\nsafe: p W q\nguarantee: q\n",
            None,
        )
        .unwrap();
        assert_eq!(spec.guarantee.as_deref(), Some("q"));
        let expect = Formula::and(
            parse_formula("p W q", &spec.alphabet).unwrap(),
            Formula::eventually(Formula::atom("q"), "q"),
        );
        assert_eq!(spec.formula, expect);
    }

    #[test]
    fn single_formula_line() {
        let spec = parse_spec_file("atoms: f stop\nformula: [] (f -> X stop)\n", None).unwrap();
        assert!(spec.guarantee.is_none());
        assert!(spec.formula.is_safe_ltl());
    }

    #[test]
    fn system_alphabet_wins_and_validates_declared_atoms() {
        let sys = Alphabet::new(["a", "b", "c"]).unwrap();
        let spec = parse_spec_file("formula: a W b\n", Some(&sys)).unwrap();
        assert_eq!(spec.alphabet.names(), sys.names());

        let err = parse_spec_file("atoms: a z\nformula: a\n", Some(&sys)).unwrap_err();
        assert!(err.to_string().contains("`z`"), "{err}");
    }

    #[test]
    fn rejects_mixed_and_missing_keys() {
        assert!(parse_spec_file("atoms: p\n", None).is_err());
        assert!(
            parse_spec_file("atoms: p\nformula: p\nsafe: p\n", None).is_err()
        );
        assert!(parse_spec_file("atoms: p q\nsafe: p\nguarantee: p & q\n", None).is_err());
    }
}
