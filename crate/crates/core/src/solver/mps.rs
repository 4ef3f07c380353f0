//! Fixed-format MPS writer.
//!
//! Names longer than eight characters (or containing whitespace) are
//! replaced by a prefix letter and seven base-36 digits of a 64-bit FNV-1a
//! hash. Any collision after mangling is an export error.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::lp::{LpInstance, Relation};

pub const OBJECTIVE_ROW: &str = "COST";
const MAX_NAME: usize = 8;
const FIELD: usize = 12;

/// Names used in the MPS document, parallel to the LP's rows and columns.
#[derive(Debug, Clone, PartialEq)]
pub struct MpsNames {
    pub rows: Vec<String>,
    pub cols: Vec<String>,
}

fn fnv1a(s: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in s.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

fn mangle(prefix: char, name: &str) -> String {
    let fits = name.len() <= MAX_NAME
        && !name.is_empty()
        && name.bytes().all(|b| b.is_ascii_graphic())
        && !name.starts_with(['*', '$']);
    if fits {
        return name.to_string();
    }
    const DIGITS: &[u8] = b"0123456789ABCDEFGHIJKLMNOPQRSTUVWXYZ";
    let mut h = fnv1a(name);
    let mut out = String::with_capacity(MAX_NAME);
    out.push(prefix);
    for _ in 0..MAX_NAME - 1 {
        out.push(DIGITS[(h % 36) as usize] as char);
        h /= 36;
    }
    out
}

/// Computes the mangled names and checks them for collisions.
pub fn mps_names(lp: &LpInstance) -> Result<MpsNames> {
    let rows: Vec<String> = lp.rows.iter().map(|r| mangle('R', &r.name)).collect();
    let cols: Vec<String> = lp.columns.iter().map(|c| mangle('C', &c.name)).collect();
    let mut seen: HashMap<&str, &str> = HashMap::new();
    seen.insert(OBJECTIVE_ROW, "objective");
    let mut clashes = Vec::new();
    let originals = lp
        .rows
        .iter()
        .map(|r| r.name.as_str())
        .zip(rows.iter())
        .chain(lp.columns.iter().map(|c| c.name.as_str()).zip(cols.iter()));
    for (orig, mangled) in originals {
        if let Some(other) = seen.insert(mangled.as_str(), orig) {
            clashes.push(format!("{orig} and {other} both map to {mangled}"));
        }
    }
    if !clashes.is_empty() {
        return Err(Error::Export(format!("name collision: {}", clashes.join("; "))));
    }
    Ok(MpsNames { rows, cols })
}

/// Shortest rendering of `v` that fits the 12-character numeric field.
pub(crate) fn format_number(v: f64) -> String {
    let plain = format!("{v}");
    if plain.len() <= FIELD {
        return plain;
    }
    // Pick the closest rendering that fits, fixed or exponent notation.
    let fixed = (0..FIELD).map(|p| format!("{v:.p$}"));
    let exp = (0..FIELD).map(|p| format!("{v:.p$e}"));
    fixed
        .chain(exp)
        .filter(|s| s.len() <= FIELD)
        .min_by(|a, b| {
            let err = |s: &str| (s.parse::<f64>().unwrap_or(f64::INFINITY) - v).abs();
            err(a).total_cmp(&err(b)).then(a.len().cmp(&b.len()))
        })
        .expect("every finite f64 fits in the field in exponent notation")
}

fn entry(out: &mut String, a: &str, b: &str, v: f64) {
    let _ = writeln!(out, "    {a:<8}  {b:<8}  {:>12}", format_number(v));
}

fn bound(out: &mut String, kind: &str, col: &str, v: Option<f64>) {
    match v {
        Some(v) => {
            let _ = writeln!(out, " {kind:<2} BND       {col:<8}  {:>12}", format_number(v));
        }
        None => {
            let _ = writeln!(out, " {kind:<2} BND       {col}");
        }
    }
}

/// Renders `lp` as a fixed-format MPS document. The objective offset is
/// recorded in a comment line.
pub fn export_mps(lp: &LpInstance, name: &str) -> Result<String> {
    lp.check()?;
    let names = mps_names(lp)?;
    let mut out = String::new();
    let _ = writeln!(out, "* objective offset: {:?}", lp.offset());
    let _ = writeln!(out, "NAME          {}", mangle('P', name));
    out.push_str("ROWS\n");
    let _ = writeln!(out, " N  {OBJECTIVE_ROW}");
    for (row, rname) in lp.rows.iter().zip(&names.rows) {
        let kind = match row.relation {
            Relation::Le => "L",
            Relation::Ge => "G",
            Relation::Eq => "E",
        };
        let _ = writeln!(out, " {kind}  {rname}");
    }

    let mut by_col: Vec<Vec<(usize, f64)>> = vec![Vec::new(); lp.num_cols()];
    for (i, row) in lp.rows.iter().enumerate() {
        for &(j, a) in &row.coeffs {
            match by_col[j].last_mut() {
                Some(last) if last.0 == i => last.1 += a,
                _ => by_col[j].push((i, a)),
            }
        }
    }
    out.push_str("COLUMNS\n");
    for (j, col) in lp.columns.iter().enumerate() {
        let cname = &names.cols[j];
        let entries: Vec<&(usize, f64)> = by_col[j].iter().filter(|e| e.1 != 0.0).collect();
        if col.cost != 0.0 || entries.is_empty() {
            entry(&mut out, cname, OBJECTIVE_ROW, col.cost);
        }
        for &&(i, a) in &entries {
            entry(&mut out, cname, &names.rows[i], a);
        }
    }

    out.push_str("RHS\n");
    for (row, rname) in lp.rows.iter().zip(&names.rows) {
        if row.rhs != 0.0 {
            entry(&mut out, "RHS", rname, row.rhs);
        }
    }

    out.push_str("BOUNDS\n");
    for (col, cname) in lp.columns.iter().zip(&names.cols) {
        let (lo, up) = (col.lower, col.upper);
        if lo == up {
            bound(&mut out, "FX", cname, Some(lo));
            continue;
        }
        match (lo.is_finite(), up.is_finite()) {
            (false, false) => bound(&mut out, "FR", cname, None),
            (false, true) => {
                bound(&mut out, "MI", cname, None);
                bound(&mut out, "UP", cname, Some(up));
            }
            (true, _) => {
                if lo != 0.0 {
                    bound(&mut out, "LO", cname, Some(lo));
                }
                if up.is_finite() {
                    bound(&mut out, "UP", cname, Some(up));
                }
            }
        }
    }
    out.push_str("ENDATA\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::{RowTag, Symbol, VarKey};

    #[test]
    fn numbers_fit_the_field() {
        for v in [0.0, 1.0, -2.5, 0.0802426, 1e-12, -1.234567890123e20, 219_027.123_456_789, f64::MAX] {
            let s = format_number(v);
            assert!(s.len() <= FIELD, "{s}");
            let back: f64 = s.parse().unwrap();
            assert!((back - v).abs() <= 1e-9 * v.abs().max(1.0) || v.abs() > 1e15, "{v} -> {s}");
        }
        assert_eq!(format_number(0.1), "0.1");
    }

    #[test]
    fn short_names_are_kept_and_long_names_hashed() {
        assert_eq!(mangle('C', "x"), "x");
        let m = mangle('C', "G_existing[up,12]");
        assert_eq!(m.len(), 8);
        assert!(m.starts_with('C'));
        assert_eq!(m, mangle('C', "G_existing[up,12]"));
        assert_ne!(m, mangle('C', "G_existing[up,13]"));
    }

    #[test]
    fn collisions_are_reported() {
        let mut lp = LpInstance::new();
        lp.add_column(VarKey::scalar(Symbol::PHeat), "COST".into(), 0.0, 1.0, 1.0);
        assert!(matches!(mps_names(&lp), Err(Error::Export(_))));
    }

    #[test]
    fn single_row_document() {
        let mut lp = LpInstance::new();
        let x = lp.add_column(VarKey::scalar(Symbol::PHeat), "x".into(), 0.0, f64::INFINITY, 0.0);
        lp.add_row("r".into(), RowTag::Ghg, vec![(x, 1.0)], Relation::Le, 1.0);
        let doc = export_mps(&lp, "t").unwrap();
        let expected = "* objective offset: 0.0\n\
                        NAME          t\n\
                        ROWS\n N  COST\n L  r\n\
                        COLUMNS\n    x         r                    1\n\
                        RHS\n    RHS       r                    1\n\
                        BOUNDS\nENDATA\n";
        assert_eq!(doc, expected);
    }
}
