//! Symbols of the jet space: model parameters, arbitrary constants,
//! independent and dependent variables, jet coordinates and the opaque
//! coefficient functions used while deriving determining equations.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Model parameters of the BBM-KdV family.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub enum Param {
    A,
    B,
    C,
    Eps,
    Kappa,
    Lambda,
    Sigma,
}

impl Param {
    pub const ALL: [Param; 7] = [
        Param::A,
        Param::B,
        Param::C,
        Param::Eps,
        Param::Kappa,
        Param::Lambda,
        Param::Sigma,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Param::A => "a",
            Param::B => "b",
            Param::C => "c",
            Param::Eps => "eps",
            Param::Kappa => "kappa",
            Param::Lambda => "lambda",
            Param::Sigma => "sigma",
        }
    }

    pub fn from_name(name: &str) -> Option<Param> {
        Param::ALL.into_iter().find(|p| p.name() == name)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub enum Indep {
    T,
    X,
}

impl Indep {
    pub fn name(self) -> &'static str {
        match self {
            Indep::T => "t",
            Indep::X => "x",
        }
    }
}

/// Dependent variables. The barred ones are the adjoint variables of the
/// formal Lagrangian.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub enum DepVar {
    U,
    V,
    UBar,
    VBar,
}

impl DepVar {
    pub fn name(self) -> &'static str {
        match self {
            DepVar::U => "u",
            DepVar::V => "v",
            DepVar::UBar => "ubar",
            DepVar::VBar => "vbar",
        }
    }

    pub fn from_name(name: &str) -> Option<DepVar> {
        [DepVar::U, DepVar::V, DepVar::UBar, DepVar::VBar]
            .into_iter()
            .find(|d| d.name() == name)
    }

    pub fn is_adjoint(self) -> bool {
        matches!(self, DepVar::UBar | DepVar::VBar)
    }
}

/// Multi-index over (t, x), stored as derivative counts so that `u_tx` and
/// `u_xt` are the same coordinate.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Default, Serialize, Deserialize)]
pub struct JetIndex {
    pub t: u8,
    pub x: u8,
}

impl JetIndex {
    pub const ZERO: JetIndex = JetIndex { t: 0, x: 0 };

    pub fn new(t: u8, x: u8) -> Self {
        JetIndex { t, x }
    }

    pub fn order(self) -> usize {
        self.t as usize + self.x as usize
    }

    pub fn shifted(self, dir: Indep) -> Self {
        match dir {
            Indep::T => JetIndex { t: self.t + 1, x: self.x },
            Indep::X => JetIndex { t: self.t, x: self.x + 1 },
        }
    }

    /// All indices of order at most `order`, sorted by order then t-count.
    pub fn up_to(order: usize) -> Vec<JetIndex> {
        let mut out = Vec::new();
        for k in 0..=order {
            for t in (0..=k).rev() {
                out.push(JetIndex::new(t as u8, (k - t) as u8));
            }
        }
        out
    }

    pub fn suffix(self) -> String {
        let mut s = String::with_capacity(self.order());
        s.extend(std::iter::repeat_n('t', self.t as usize));
        s.extend(std::iter::repeat_n('x', self.x as usize));
        s
    }
}

impl Ord for JetIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.order()
            .cmp(&other.order())
            .then_with(|| other.t.cmp(&self.t))
    }
}

impl PartialOrd for JetIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A dependent variable together with a derivative multi-index. Order zero
/// is the dependent variable itself.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct Jet {
    pub var: DepVar,
    pub index: JetIndex,
}

impl Jet {
    pub fn new(var: DepVar, t: u8, x: u8) -> Self {
        Jet { var, index: JetIndex::new(t, x) }
    }

    pub fn order(self) -> usize {
        self.index.order()
    }

    pub fn shifted(self, dir: Indep) -> Self {
        Jet { var: self.var, index: self.index.shifted(dir) }
    }
}

impl Ord for Jet {
    fn cmp(&self, other: &Self) -> Ordering {
        self.order()
            .cmp(&other.order())
            .then_with(|| self.var.cmp(&other.var))
            .then_with(|| self.index.cmp(&other.index))
    }
}

impl PartialOrd for Jet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// The four coefficient functions of a point-symmetry generator, used as
/// opaque functions of (t, x, u, v).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub enum CoeffFn {
    T,
    X,
    U,
    V,
}

impl CoeffFn {
    pub const ALL: [CoeffFn; 4] = [CoeffFn::T, CoeffFn::X, CoeffFn::U, CoeffFn::V];

    pub fn name(self) -> &'static str {
        match self {
            CoeffFn::T => "T",
            CoeffFn::X => "X",
            CoeffFn::U => "U",
            CoeffFn::V => "V",
        }
    }
}

/// Partial derivative orders of a coefficient function in (t, x, u, v).
pub type FuncDerivs = [u8; 4];

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub enum SymbolKind {
    Parameter,
    IndependentVar,
    DependentVar,
    JetCoordinate,
    ArbitraryConstant,
    AdjointVar,
    Unknown,
    Function,
}

/// A symbol of the expression kernel.
///
/// The derived order (parameters, constants, unknowns, functions, t and x,
/// then jet coordinates by total order) is the global variable order used by
/// the canonical form.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Symbol {
    Param(Param),
    /// Arbitrary constant `c<k>`; a separate namespace from the parameter `c`.
    Const(u32),
    /// Internal linear unknown (ansatz coefficient).
    Unknown(u32),
    Func(CoeffFn, FuncDerivs),
    Indep(Indep),
    Jet(Jet),
}

impl Symbol {
    pub fn t() -> Self {
        Symbol::Indep(Indep::T)
    }

    pub fn x() -> Self {
        Symbol::Indep(Indep::X)
    }

    pub fn dep(var: DepVar) -> Self {
        Symbol::Jet(Jet { var, index: JetIndex::ZERO })
    }

    pub fn jet(var: DepVar, t: u8, x: u8) -> Self {
        Symbol::Jet(Jet::new(var, t, x))
    }

    pub fn kind(&self) -> SymbolKind {
        match self {
            Symbol::Param(_) => SymbolKind::Parameter,
            Symbol::Const(_) => SymbolKind::ArbitraryConstant,
            Symbol::Unknown(_) => SymbolKind::Unknown,
            Symbol::Func(..) => SymbolKind::Function,
            Symbol::Indep(_) => SymbolKind::IndependentVar,
            Symbol::Jet(j) if j.order() > 0 => SymbolKind::JetCoordinate,
            Symbol::Jet(j) if j.var.is_adjoint() => SymbolKind::AdjointVar,
            Symbol::Jet(_) => SymbolKind::DependentVar,
        }
    }

    /// Symbols that are constant over the jet space (parameters, arbitrary
    /// constants and internal unknowns).
    pub fn is_constant(&self) -> bool {
        matches!(self, Symbol::Param(_) | Symbol::Const(_) | Symbol::Unknown(_))
    }

    pub fn as_jet(&self) -> Option<Jet> {
        match self {
            Symbol::Jet(j) => Some(*j),
            _ => None,
        }
    }

    /// Jet coordinate of positive order.
    pub fn is_positive_jet(&self) -> bool {
        matches!(self, Symbol::Jet(j) if j.order() > 0)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::Param(p) => f.write_str(p.name()),
            Symbol::Const(k) => write!(f, "c{k}"),
            Symbol::Unknown(k) => write!(f, "k{k}"),
            Symbol::Func(g, d) => {
                f.write_str(g.name())?;
                if d.iter().any(|&n| n > 0) {
                    f.write_str("_")?;
                    for (n, name) in d.iter().zip(["t", "x", "u", "v"]) {
                        for _ in 0..*n {
                            f.write_str(name)?;
                        }
                    }
                }
                Ok(())
            }
            Symbol::Indep(i) => f.write_str(i.name()),
            Symbol::Jet(j) => {
                f.write_str(j.var.name())?;
                if j.order() > 0 {
                    write!(f, "_{}", j.index.suffix())?;
                }
                Ok(())
            }
        }
    }
}
