use std::collections::{BTreeMap, HashMap};
use std::fmt::{self, Write as _};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        })
    }
}

/// Decision variable families, in canonical column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Symbol {
    XOn,
    XOff,
    XUsSolar,
    XBattE,
    XBattP,
    XH2E,
    XH2P,
    XFf,
    XTx,
    PHeat,
    PVeh,
    GExisting,
    GNew,
    GExistingDiff,
    GNewDiff,
    HFlex,
    L,
    V,
    GammaBatt,
    DeltaBatt,
    EBatt,
    GammaH2,
    DeltaH2,
    EH2,
    DVehFlex,
    Z,
}

impl Symbol {
    pub fn name(self) -> &'static str {
        match self {
            Symbol::XOn => "X_on",
            Symbol::XOff => "X_off",
            Symbol::XUsSolar => "X_us_solar",
            Symbol::XBattE => "X_batt_e",
            Symbol::XBattP => "X_batt_p",
            Symbol::XH2E => "X_h2_e",
            Symbol::XH2P => "X_h2_p",
            Symbol::XFf => "X_ff",
            Symbol::XTx => "X_tx",
            Symbol::PHeat => "p_heat",
            Symbol::PVeh => "p_veh",
            Symbol::GExisting => "G_existing",
            Symbol::GNew => "G_new",
            Symbol::GExistingDiff => "G_existing_diff",
            Symbol::GNewDiff => "G_new_diff",
            Symbol::HFlex => "H_flex",
            Symbol::L => "L",
            Symbol::V => "V",
            Symbol::GammaBatt => "gamma_batt",
            Symbol::DeltaBatt => "delta_batt",
            Symbol::EBatt => "E_batt",
            Symbol::GammaH2 => "gamma_h2",
            Symbol::DeltaH2 => "delta_h2",
            Symbol::EH2 => "E_h2",
            Symbol::DVehFlex => "D_veh_flex",
            Symbol::Z => "Z",
        }
    }
}

/// Identifies a column by variable family, owner and hour. Owners are node
/// indices, interface indices (for `X_tx`) or directed arc indices (for `Z`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarKey {
    pub symbol: Symbol,
    pub owner: usize,
    pub t: Option<usize>,
}

impl VarKey {
    pub fn scalar(symbol: Symbol) -> Self {
        VarKey { symbol, owner: 0, t: None }
    }

    pub fn capacity(symbol: Symbol, owner: usize) -> Self {
        VarKey { symbol, owner, t: None }
    }

    pub fn hourly(symbol: Symbol, owner: usize, t: usize) -> Self {
        VarKey { symbol, owner, t: Some(t) }
    }
}

/// Constraint families, used to audit that every equation family is present.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RowTag {
    EnergyBalance,
    ReserveExisting,
    ReserveNew,
    RampExisting,
    RampNew,
    OnshoreCap,
    OffshoreCap,
    SolarCap,
    TxLimit,
    BattRecursion,
    BattEnergyCap,
    BattChargeCap,
    BattDischargeCap,
    BattRatio,
    H2Recursion,
    H2EnergyCap,
    H2ChargeCap,
    H2DischargeCap,
    HydroDaily,
    HydroHourly,
    BioDaily,
    BioHourly,
    ImportCap,
    EvFlexDaily,
    EvFlexHourly,
    LowCarbon,
    Renewable,
    Ghg,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub key: VarKey,
    pub lower: f64,
    pub upper: f64,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub name: String,
    pub tag: RowTag,
    pub coeffs: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Row {
    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// Distance from the bound in the feasible direction; negative when violated.
    pub fn slack(&self, activity: f64) -> f64 {
        match self.relation {
            Relation::Le => self.rhs - activity,
            Relation::Ge => activity - self.rhs,
            Relation::Eq => -(activity - self.rhs).abs(),
        }
    }
}

/// A linear program `min c.x + offset` over rows and column bounds, with a
/// name index back to the model's variables.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LpInstance {
    pub columns: Vec<Column>,
    pub rows: Vec<Row>,
    /// Constant objective terms, by label.
    pub offset_parts: BTreeMap<String, f64>,
    index: HashMap<VarKey, usize>,
}

impl LpInstance {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_column(&mut self, key: VarKey, name: String, lower: f64, upper: f64, cost: f64) -> usize {
        let j = self.columns.len();
        let previous = self.index.insert(key, j);
        debug_assert!(previous.is_none(), "duplicate column {name}");
        self.columns.push(Column { name, key, lower, upper, cost });
        j
    }

    pub fn add_row(
        &mut self,
        name: String,
        tag: RowTag,
        coeffs: Vec<(usize, f64)>,
        relation: Relation,
        rhs: f64,
    ) -> usize {
        self.rows.push(Row { name, tag, coeffs, relation, rhs });
        self.rows.len() - 1
    }

    pub fn add_offset(&mut self, label: &str, value: f64) {
        *self.offset_parts.entry(label.to_string()).or_insert(0.0) += value;
    }

    pub fn offset(&self) -> f64 {
        self.offset_parts.values().fold(0.0, |a, b| a + b)
    }

    pub fn col(&self, key: VarKey) -> Option<usize> {
        self.index.get(&key).copied()
    }

    pub fn num_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    /// Value of a column in `x`, or zero if the column does not exist.
    pub fn value(&self, x: &[f64], key: VarKey) -> f64 {
        self.col(key).map_or(0.0, |j| x[j])
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        let linear: f64 = self.columns.iter().zip(x).map(|(c, v)| c.cost * v).sum();
        linear + self.offset()
    }

    pub fn rows_with_tag(&self, tag: RowTag) -> impl Iterator<Item = (usize, &Row)> {
        self.rows.iter().enumerate().filter(move |(_, r)| r.tag == tag)
    }

    pub fn row_counts(&self) -> BTreeMap<RowTag, usize> {
        let mut counts = BTreeMap::new();
        for r in &self.rows {
            *counts.entry(r.tag).or_insert(0) += 1;
        }
        counts
    }

    /// Rejects non-finite data and out-of-range column references.
    pub fn check(&self) -> Result<()> {
        for c in &self.columns {
            if !c.cost.is_finite() || c.lower.is_nan() || c.upper.is_nan() {
                return Err(Error::InvalidLp(format!("column {} has non-finite data", c.name)));
            }
            if c.lower == f64::INFINITY || c.upper == f64::NEG_INFINITY {
                return Err(Error::InvalidLp(format!("column {} has an impossible bound", c.name)));
            }
        }
        let n = self.columns.len();
        for r in &self.rows {
            if !r.rhs.is_finite() {
                return Err(Error::InvalidLp(format!("row {} has non-finite rhs", r.name)));
            }
            for &(j, a) in &r.coeffs {
                if j >= n {
                    return Err(Error::InvalidLp(format!("row {} references column {j} of {n}", r.name)));
                }
                if !a.is_finite() {
                    return Err(Error::InvalidLp(format!("row {} has a non-finite coefficient", r.name)));
                }
            }
        }
        for (label, v) in &self.offset_parts {
            if !v.is_finite() {
                return Err(Error::InvalidLp(format!("objective offset {label} is not finite")));
            }
        }
        Ok(())
    }

    /// Text rendering with exact float formatting; equal instances render to
    /// equal strings.
    pub fn canonical_text(&self) -> String {
        let mut out = String::new();
        for (label, v) in &self.offset_parts {
            let _ = writeln!(out, "offset {label} {v:?}");
        }
        for c in &self.columns {
            let _ = writeln!(out, "col {} [{:?}, {:?}] cost {:?}", c.name, c.lower, c.upper, c.cost);
        }
        for r in &self.rows {
            let _ = write!(out, "row {} {:?}", r.name, r.tag);
            for &(j, a) in &r.coeffs {
                let _ = write!(out, " {:?}*{}", a, self.columns[j].name);
            }
            let _ = writeln!(out, " {} {:?}", r.relation, r.rhs);
        }
        out
    }

    /// Row and column name index, one entry per line.
    pub fn name_index(&self) -> String {
        let mut out = String::new();
        for (j, c) in self.columns.iter().enumerate() {
            let _ = writeln!(out, "C{j}\t{}", c.name);
        }
        for (i, r) in self.rows.iter().enumerate() {
            let _ = writeln!(out, "R{i}\t{}", r.name);
        }
        out
    }
}
