//! Line-oriented abstraction config: model name, named dimensions, domain
//! and predicate boxes in `lo<=dim<=hi` form, grid widths, sampling period,
//! the input menu, and optional exogenous/input-predicate atoms.

use super::ode::{real, Real};
use super::AbsError;

/// Parsed configuration; feed to `build_grid_abstraction`.
#[derive(Debug, Clone)]
pub struct AbstractionSpec<F: Real> {
    pub model: String,
    pub dim_names: Vec<String>,
    pub domain: Vec<(F, F)>,
    pub wrap: Vec<bool>,
    pub eta: Vec<F>,
    pub tau: F,
    pub substeps: usize,
    pub margin: Vec<F>,
    pub inputs: Vec<(String, Vec<F>)>,
    pub initial_box: Vec<(F, F)>,
    /// Predicate atoms with their closed boxes (full domain where a
    /// dimension is unconstrained).
    pub atoms: Vec<(String, Vec<(F, F)>)>,
    /// Environment-controlled atoms, for the extended system.
    pub exo: Vec<String>,
    /// Atoms observing the previously applied input: name plus the input
    /// names it holds for.
    pub input_atoms: Vec<(String, Vec<String>)>,
}

struct Parser<'a, F: Real> {
    dim_names: Vec<String>,
    domain: Vec<(F, F)>,
    line: usize,
    _marker: std::marker::PhantomData<&'a ()>,
}

impl<F: Real> Parser<'_, F> {
    fn err(&self, msg: impl Into<String>) -> AbsError {
        AbsError::Config {
            line: self.line,
            msg: msg.into(),
        }
    }

    fn dim(&self, name: &str) -> Result<usize, AbsError> {
        self.dim_names
            .iter()
            .position(|d| d == name)
            .ok_or_else(|| self.err(format!("unknown dimension `{name}`")))
    }

    fn number(&self, tok: &str) -> Result<F, AbsError> {
        let v: f64 = tok
            .parse()
            .map_err(|_| self.err(format!("bad number `{tok}`")))?;
        Ok(real(v))
    }

    fn numbers(&self, rest: &str) -> Result<Vec<F>, AbsError> {
        rest.split_whitespace().map(|t| self.number(t)).collect()
    }

    /// Parses `lo<=dim<=hi, ...` into a per-dimension box, defaulting
    /// unconstrained dimensions to `fallback` (the domain), or erroring
    /// when no fallback exists yet (the domain line itself).
    // Negated comparison so that NaN bounds are rejected too.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    fn constraints(&self, rest: &str, fallback: Option<&[(F, F)]>) -> Result<Vec<(F, F)>, AbsError> {
        let mut bx: Vec<Option<(F, F)>> = vec![None; self.dim_names.len()];
        for part in rest.split(',') {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            let pieces: Vec<&str> = part.split("<=").map(str::trim).collect();
            let [lo, name, hi] = pieces.as_slice() else {
                return Err(self.err(format!("expected `lo<=dim<=hi`, got `{part}`")));
            };
            let d = self.dim(name)?;
            if bx[d].is_some() {
                return Err(self.err(format!("dimension `{name}` constrained twice")));
            }
            let (lo, hi) = (self.number(lo)?, self.number(hi)?);
            if !(lo <= hi) {
                return Err(self.err(format!("empty range for `{name}`")));
            }
            bx[d] = Some((lo, hi));
        }
        if let Some(f) = fallback {
            if f.len() != self.dim_names.len() {
                return Err(self.err("`domain:` must come before box lines"));
            }
        }
        bx.into_iter()
            .enumerate()
            .map(|(d, r)| match (r, fallback) {
                (Some(r), _) => Ok(r),
                (None, Some(f)) => Ok(f[d]),
                (None, None) => Err(self.err(format!(
                    "dimension `{}` missing from domain",
                    self.dim_names[d]
                ))),
            })
            .collect()
    }
}

/// Parses the config text. Later lines may reference dimensions, so
/// `dims:` must precede `domain:`, boxes, and `eta:`.
pub fn parse_abstraction_config<F: Real>(text: &str) -> Result<AbstractionSpec<F>, AbsError> {
    let mut p: Parser<F> = Parser {
        dim_names: Vec::new(),
        domain: Vec::new(),
        line: 0,
        _marker: std::marker::PhantomData,
    };
    let mut model = None;
    let mut wrap_names: Vec<String> = Vec::new();
    let mut eta = None;
    let mut tau = None;
    let mut substeps = 16usize;
    let mut margin: Option<Vec<F>> = None;
    let mut inputs = Vec::new();
    let mut initial_box = None;
    let mut atoms = Vec::new();
    let mut exo = Vec::new();
    let mut input_atoms = Vec::new();

    for (lineno, raw) in text.lines().enumerate() {
        p.line = lineno + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (head, rest) = line
            .split_once(':')
            .ok_or_else(|| p.err("expected `key: value`"))?;
        let (head, rest) = (head.trim(), rest.trim());
        match head {
            "model" => model = Some(rest.to_string()),
            "dims" => p.dim_names = rest.split_whitespace().map(String::from).collect(),
            "domain" => p.domain = p.constraints(rest, None)?,
            "wrap" => wrap_names = rest.split_whitespace().map(String::from).collect(),
            "eta" => eta = Some(p.numbers(rest)?),
            "tau" => tau = Some(p.number(rest)?),
            "substeps" => {
                substeps = rest
                    .parse()
                    .map_err(|_| p.err(format!("bad substep count `{rest}`")))?;
            }
            "margin" => margin = Some(p.numbers(rest)?),
            "initial" => initial_box = Some(p.constraints(rest, Some(&p.domain.clone()))?),
            _ => {
                let mut words = head.split_whitespace();
                match (words.next(), words.next(), words.next()) {
                    (Some("input"), Some(name), None) => {
                        inputs.push((name.to_string(), p.numbers(rest)?));
                    }
                    (Some("atom"), Some(name), None) => {
                        let bx = p.constraints(rest, Some(&p.domain.clone()))?;
                        atoms.push((name.to_string(), bx));
                    }
                    (Some("exo"), Some(name), None) => {
                        if !rest.is_empty() {
                            return Err(p.err("`exo <name>:` takes no value"));
                        }
                        exo.push(name.to_string());
                    }
                    (Some("input_atom"), Some(name), None) => {
                        let names: Vec<String> =
                            rest.split_whitespace().map(String::from).collect();
                        if names.is_empty() {
                            return Err(p.err("input_atom needs at least one input name"));
                        }
                        input_atoms.push((p.line, name.to_string(), names));
                    }
                    _ => return Err(p.err(format!("unknown key `{head}`"))),
                }
            }
        }
    }

    p.line = 0;
    let model = model.ok_or_else(|| p.err("missing `model:`"))?;
    if p.dim_names.is_empty() {
        return Err(p.err("missing `dims:`"));
    }
    if p.domain.is_empty() {
        return Err(p.err("missing `domain:`"));
    }
    let eta = eta.ok_or_else(|| p.err("missing `eta:`"))?;
    if eta.len() != p.dim_names.len() {
        return Err(p.err("`eta:` must list one width per dimension"));
    }
    let tau = tau.ok_or_else(|| p.err("missing `tau:`"))?;
    if inputs.is_empty() {
        return Err(p.err("at least one `input <name>:` line is required"));
    }
    let initial_box = initial_box.ok_or_else(|| p.err("missing `initial:`"))?;
    let mut wrap = vec![false; p.dim_names.len()];
    for name in &wrap_names {
        let d = p.dim(name)?;
        wrap[d] = true;
    }
    let margin = match margin {
        None => vec![F::zero(); p.dim_names.len()],
        Some(m) if m.len() == 1 => vec![m[0]; p.dim_names.len()],
        Some(m) if m.len() == p.dim_names.len() => m,
        Some(_) => return Err(p.err("`margin:` must be scalar or one value per dimension")),
    };
    for &(line, ref name, ref members) in &input_atoms {
        for m in members {
            if !inputs.iter().any(|(n, _)| n == m) {
                p.line = line;
                return Err(p.err(format!("input_atom `{name}` references unknown input `{m}`")));
            }
        }
    }

    Ok(AbstractionSpec {
        model,
        dim_names: p.dim_names,
        domain: p.domain,
        wrap,
        eta,
        tau,
        substeps,
        margin,
        inputs,
        initial_box,
        atoms,
        exo,
        input_atoms: input_atoms.into_iter().map(|(_, n, m)| (n, m)).collect(),
    })
}

#[cfg(test)]
pub(crate) const ROBOT_CONFIG: &str = r#"
# unicycle reach-avoid arena on a lateral-periodic belt: y wraps so the
# lateral drift amplified by heading uncertainty folds instead of leaking
# out of the domain (with y bounded, no column-reaching strategy exists
# because the drift outruns the rows within any winning horizon)
model: unicycle
dims: x y theta
domain: 0<=x<=5, 0<=y<=5, 0<=theta<=6.283185307179586
wrap: y theta
eta: 0.2 0.2 0.7853981633974483
tau: 1.0
substeps: 16
input stop: 0 0
input creep: 0.2 0
input cruise: 0.4 0
input creep_l: 0.2 0.2
input creep_r: 0.2 -0.2
input cruise_l: 0.4 0.2
input cruise_r: 0.4 -0.2
input spin_l: 0 0.2
input spin_r: 0 -0.2
initial: 0.4<=x<=0.8, 2.2<=y<=2.8, 0.1<=theta<=0.6
atom o1: 0<=x<=0.12, 0<=y<=1.6
atom o2: 4.85<=x<=5, 0<=y<=5
atom o3: 0<=x<=0.12, 3.4<=y<=5
atom target: 4.15<=x<=4.75
"#;
