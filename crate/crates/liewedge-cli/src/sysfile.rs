//! Text format for control systems.
//!
//! One `key = value` per line, `#` starts a comment. Keys:
//!
//! ```text
//! rep        = r3 | qubit | two_qubit
//! drift      = <label> | <matrix>
//! control    = <label> | <matrix>        (repeatable)
//! relaxation = diag a b c | <matrix>     (r3 only)
//! lindblad   = <rate> <label> | <rate> <matrix>   (qubit, two_qubit; repeatable)
//! samples    = <int>     orbit samples for saturation
//! grid       = <int>     edge grid points for saturation
//! rounds     = <int>
//! tol        = <float>
//! seed       = <int>
//! ```
//!
//! Labels are axes `x`, `y`, `z` (two-qubit: pairs such as `zz`, `x1`). In the
//! ℝ³ picture a label names H_axis; in the quantum pictures a drift or control
//! label names the Hamiltonian σ/2 and a Lindblad label the Pauli operator σ.
//! Matrices are written row by row, `[a b c; d e f; g h i]`, with complex
//! entries as `(re,im)`.

use std::fmt::Write as _;

use liewedge::channels::{pauli, pauli2, r3, Label};
use liewedge::matcore::{Mat, C64};
use liewedge::{ControlSystem, Rep};

use crate::error::CliError;

/// Saturation knobs that may ride along with a system.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SysOptions {
    pub samples: Option<usize>,
    pub grid: Option<usize>,
    pub rounds: Option<usize>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
}

#[derive(Clone, Debug)]
pub struct SystemFile {
    pub system: ControlSystem,
    pub options: SysOptions,
}

fn perr(line: usize, field: &str, msg: impl Into<String>) -> CliError {
    CliError::Parse {
        line,
        field: field.to_string(),
        msg: msg.into(),
    }
}

fn parse_f64(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("not a number: {s:?}"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("not finite: {s:?}"))
    }
}

fn parse_entry(tok: &str) -> Result<C64, String> {
    if let Some(inner) = tok.strip_prefix('(').and_then(|t| t.strip_suffix(')')) {
        let (re, im) = inner
            .split_once(',')
            .ok_or_else(|| format!("complex entry needs (re,im), got {tok:?}"))?;
        Ok(C64::new(parse_f64(re)?, parse_f64(im)?))
    } else {
        Ok(C64::new(parse_f64(tok)?, 0.0))
    }
}

fn split_entries(row: &str) -> Result<Vec<String>, String> {
    let mut out = vec![];
    let mut cur = String::new();
    let mut depth = 0;
    for ch in row.chars() {
        match ch {
            '(' => {
                depth += 1;
                cur.push(ch);
            }
            ')' => {
                if depth == 0 {
                    return Err("unbalanced ')'".into());
                }
                depth -= 1;
                cur.push(ch);
            }
            c if depth == 0 && (c.is_whitespace() || c == ',') => {
                if !cur.is_empty() {
                    out.push(std::mem::take(&mut cur));
                }
            }
            c if c.is_whitespace() => {}
            c => cur.push(c),
        }
    }
    if depth != 0 {
        return Err("unbalanced '('".into());
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    Ok(out)
}

/// Parse `[a b; c d]`.
pub fn parse_matrix(s: &str) -> Result<Mat, String> {
    let body = s
        .trim()
        .strip_prefix('[')
        .and_then(|t| t.strip_suffix(']'))
        .ok_or_else(|| "matrix must be enclosed in [ ]".to_string())?;
    let mut rows: Vec<Vec<C64>> = vec![];
    for row in body.split(';') {
        let entries = split_entries(row)?;
        if entries.is_empty() {
            return Err("empty matrix row".into());
        }
        rows.push(entries.iter().map(|t| parse_entry(t)).collect::<Result<_, _>>()?);
    }
    let cols = rows[0].len();
    if rows.iter().any(|r| r.len() != cols) {
        return Err("ragged matrix rows".into());
    }
    let n = rows.len();
    Ok(Mat::from_complex(n, cols, rows.into_iter().flatten().collect()))
}

/// 17 significant digits; parses back to the same bits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn format_matrix(m: &Mat) -> String {
    let mut s = String::from("[");
    for i in 0..m.rows() {
        if i > 0 {
            s.push_str("; ");
        }
        for j in 0..m.cols() {
            if j > 0 {
                s.push(' ');
            }
            let z = m.get(i, j);
            if z.im.to_bits() == 0 {
                s.push_str(&fmt_f64(z.re));
            } else {
                let _ = write!(s, "({},{})", fmt_f64(z.re), fmt_f64(z.im));
            }
        }
    }
    s.push(']');
    s
}

fn label_matrix(rep: Rep, label: &str, hamiltonian: bool) -> Result<Mat, String> {
    let l: Label = label.parse().map_err(|e: liewedge::Error| e.to_string())?;
    let m = match (rep, l) {
        (Rep::R3, Label::One(a)) if hamiltonian => r3::h(a),
        (Rep::Qubit, Label::One(a)) => pauli(a),
        (Rep::TwoQubit, Label::Two(m, n)) => pauli2(m, n),
        _ => return Err(format!("label {label:?} does not fit representation {}", rep.name())),
    };
    Ok(if hamiltonian && rep != Rep::R3 { m.scale(0.5) } else { m })
}

fn operator(rep: Rep, v: &str, hamiltonian: bool) -> Result<Mat, String> {
    if v.trim_start().starts_with('[') {
        parse_matrix(v)
    } else {
        label_matrix(rep, v.trim(), hamiltonian)
    }
}

fn parse_relaxation(v: &str) -> Result<Mat, String> {
    if let Some(rest) = v.trim().strip_prefix("diag") {
        let d: Vec<f64> = rest.split_whitespace().map(parse_f64).collect::<Result<_, _>>()?;
        if d.len() != 3 {
            return Err(format!("diag needs 3 entries, got {}", d.len()));
        }
        Ok(Mat::diag_real(&d))
    } else {
        parse_matrix(v)
    }
}

fn parse_int<T: std::str::FromStr>(v: &str) -> Result<T, String> {
    v.trim()
        .parse()
        .map_err(|_| format!("not a nonnegative integer: {v:?}"))
}

/// Parse a system file; errors name the offending line and key.
pub fn parse(text: &str) -> Result<SystemFile, CliError> {
    let mut rep: Option<Rep> = None;
    let mut entries: Vec<(usize, String, String)> = vec![];
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| perr(line, "", "expected `key = value`"))?;
        let (key, value) = (key.trim().to_string(), value.trim().to_string());
        if key == "rep" {
            if rep.is_some() {
                return Err(perr(line, "rep", "duplicate key"));
            }
            rep =
                Some(Rep::parse(&value).ok_or_else(|| perr(line, "rep", format!("unknown representation {value:?}")))?);
        } else {
            entries.push((line, key, value));
        }
    }
    let rep = rep.ok_or_else(|| perr(0, "rep", "missing key"))?;
    let n = match rep {
        Rep::R3 => 3,
        r => r.hilbert_dim(),
    };
    let mut drift: Option<Mat> = None;
    let mut controls = vec![];
    let mut relaxation: Option<Mat> = None;
    let mut lindblad = vec![];
    let mut opts = SysOptions::default();
    let mut last_line = 0;
    for (line, key, value) in entries {
        last_line = line;
        let e = |msg: String| perr(line, &key, msg);
        let square = |m: Mat| -> Result<Mat, String> {
            if m.shape() == (n, n) {
                Ok(m)
            } else {
                Err(format!("expected {n}x{n}, got {}x{}", m.rows(), m.cols()))
            }
        };
        match key.as_str() {
            "drift" => {
                if drift.is_some() {
                    return Err(e("duplicate key".into()));
                }
                drift = Some(operator(rep, &value, true).and_then(square).map_err(e)?);
            }
            "control" => controls.push(operator(rep, &value, true).and_then(square).map_err(e)?),
            "relaxation" => {
                if rep != Rep::R3 {
                    return Err(e("relaxation applies to rep = r3 only".into()));
                }
                if relaxation.is_some() {
                    return Err(e("duplicate key".into()));
                }
                relaxation = Some(parse_relaxation(&value).and_then(square).map_err(e)?);
            }
            "lindblad" => {
                if rep == Rep::R3 {
                    return Err(e("use relaxation for rep = r3".into()));
                }
                let (rate, op) = value
                    .split_once(char::is_whitespace)
                    .ok_or_else(|| e("expected `<rate> <operator>`".into()))?;
                let rate = parse_f64(rate).map_err(e)?;
                lindblad.push((operator(rep, op, false).and_then(square).map_err(e)?, rate));
            }
            "samples" => opts.samples = Some(parse_int(&value).map_err(e)?),
            "grid" => opts.grid = Some(parse_int(&value).map_err(e)?),
            "rounds" => opts.rounds = Some(parse_int(&value).map_err(e)?),
            "seed" => opts.seed = Some(parse_int(&value).map_err(e)?),
            "tol" => opts.tol = Some(parse_f64(&value).map_err(e)?),
            _ => return Err(e("unknown key".into())),
        }
    }
    let drift = drift.unwrap_or_else(|| Mat::zeros(n, n));
    let system = match rep {
        Rep::R3 => ControlSystem::r3(drift, controls, relaxation.unwrap_or_else(|| Mat::zeros(3, 3))),
        _ => ControlSystem::quantum(rep, drift, controls, lindblad),
    }
    .map_err(|err| perr(last_line, "system", err.to_string()))?;
    Ok(SystemFile { system, options: opts })
}

/// Canonical text of a system with explicit matrices.
pub fn emit(sf: &SystemFile) -> String {
    let sys = &sf.system;
    let mut s = String::new();
    let _ = writeln!(s, "rep = {}", sys.rep().name());
    let _ = writeln!(s, "drift = {}", format_matrix(sys.drift()));
    for c in sys.controls() {
        let _ = writeln!(s, "control = {}", format_matrix(c));
    }
    if let Some(r) = sys.relaxation() {
        let _ = writeln!(s, "relaxation = {}", format_matrix(r));
    }
    for (v, g) in sys.lindblad_ops() {
        let _ = writeln!(s, "lindblad = {} {}", fmt_f64(*g), format_matrix(v));
    }
    let o = &sf.options;
    if let Some(v) = o.samples {
        let _ = writeln!(s, "samples = {v}");
    }
    if let Some(v) = o.grid {
        let _ = writeln!(s, "grid = {v}");
    }
    if let Some(v) = o.rounds {
        let _ = writeln!(s, "rounds = {v}");
    }
    if let Some(v) = o.tol {
        let _ = writeln!(s, "tol = {}", fmt_f64(v));
    }
    if let Some(v) = o.seed {
        let _ = writeln!(s, "seed = {v}");
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use liewedge::channels::{build_system, ChannelName, ChannelSpec};
    use proptest::prelude::*;

    fn same(a: &ControlSystem, b: &ControlSystem) -> bool {
        let bits = |m: &Mat| -> Vec<(u64, u64)> { m.data().iter().map(|z| (z.re.to_bits(), z.im.to_bits())).collect() };
        a.rep() == b.rep()
            && bits(a.drift()) == bits(b.drift())
            && a.controls().len() == b.controls().len()
            && a.controls().iter().zip(b.controls()).all(|(x, y)| bits(x) == bits(y))
            && a.relaxation().map(bits) == b.relaxation().map(bits)
            && a.lindblad_ops().len() == b.lindblad_ops().len()
            && a.lindblad_ops()
                .iter()
                .zip(b.lindblad_ops())
                .all(|((x, g), (y, h))| bits(x) == bits(y) && g.to_bits() == h.to_bits())
    }

    #[test]
    fn parses_example2() {
        let sf = parse("rep = r3\n# comment\ndrift = z\ncontrol = y\nrelaxation = diag 1 0 1\n").unwrap();
        assert_eq!(sf.system.num_controls(), 1);
        assert!(sf
            .system
            .relaxation()
            .unwrap()
            .approx_eq(&Mat::diag_real(&[1.0, 0.0, 1.0]), 0.0));
        assert!(sf.system.drift().approx_eq(&r3::h(liewedge::channels::Axis::Z), 0.0));
    }

    #[test]
    fn parses_quantum_labels_and_matrices() {
        let text =
            "rep = qubit\ndrift = z\ncontrol = [0 0.5; 0.5 0]\nlindblad = 0.25 z\nlindblad = 1 [0 1; 0 0]\nseed = 7\n";
        let sf = parse(text).unwrap();
        assert!(sf
            .system
            .drift()
            .approx_eq(&pauli(liewedge::channels::Axis::Z).scale(0.5), 0.0));
        assert_eq!(sf.system.lindblad_ops().len(), 2);
        assert_eq!(sf.options.seed, Some(7));
    }

    #[test]
    fn complex_entries() {
        let m = parse_matrix("[(0,-1) 2; (1.5,0.25) -3e-2]").unwrap();
        assert_eq!(m.get(0, 0), C64::new(0.0, -1.0));
        assert_eq!(m.get(1, 0), C64::new(1.5, 0.25));
        assert_eq!(m.get(1, 1), C64::new(-3e-2, 0.0));
    }

    #[test]
    fn diagnostics_name_line_and_field() {
        let err = parse("rep = r3\ndrift = [0 1; -1 0]\n").unwrap_err();
        match err {
            CliError::Parse { line, field, .. } => assert_eq!((line, field.as_str()), (2, "drift")),
            e => panic!("{e}"),
        }
        let err = parse("rep = r3\nbogus = 1\n").unwrap_err();
        assert!(matches!(err, CliError::Parse { line: 2, .. }));
        assert!(matches!(parse("drift = z\n").unwrap_err(), CliError::Parse { field, .. } if field == "rep"));
        assert!(parse("rep = r3\ndrift = [1 0 0; 0 0 0; 0 0 0]\n").is_err());
        assert!(parse("rep = qubit\nlindblad = -1 z\n").is_err());
        assert!(parse("rep = r3\ncontrol = xz\n").is_err());
    }

    #[test]
    fn catalog_systems_round_trip() {
        for name in ChannelName::ALL {
            let sys = build_system(&ChannelSpec::new(name)).unwrap();
            let sf = SystemFile {
                system: sys,
                options: SysOptions {
                    samples: Some(10),
                    tol: Some(1e-9),
                    ..Default::default()
                },
            };
            let back = parse(&emit(&sf)).unwrap();
            assert!(same(&sf.system, &back.system), "{name}");
            assert_eq!(sf.options, back.options);
        }
    }

    proptest! {
        #[test]
        fn random_systems_round_trip(
            v in prop::collection::vec(-1e3f64..1e3, 9),
            d in prop::collection::vec(0.0f64..10.0, 3),
            re in prop::collection::vec(-1.0f64..1.0, 8),
            g in 0.0f64..5.0,
        ) {
            let m = Mat::from_real(3, 3, &v);
            let skew = (&m - &m.transpose()).scale(1.0 / 3.0);
            let sys = ControlSystem::r3(skew.clone(), vec![skew], Mat::diag_real(&d)).unwrap();
            let sf = SystemFile { system: sys, options: SysOptions::default() };
            let back = parse(&emit(&sf)).unwrap();
            prop_assert!(same(&sf.system, &back.system));

            let l = Mat::from_complex(2, 2, (0..4).map(|k| C64::new(re[2 * k], re[2 * k + 1])).collect());
            let h = (&l + &l.adjoint()).scale(0.5);
            let q = ControlSystem::quantum(Rep::Qubit, h, vec![], vec![(l, g)]).unwrap();
            let sf = SystemFile { system: q, options: SysOptions::default() };
            let back = parse(&emit(&sf)).unwrap();
            prop_assert!(same(&sf.system, &back.system));
        }
    }
}
