//! Monotone frameworks over an explicit finite lattice, lifted to a flow
//! algebra of function tables: `⊕` is the pointwise join, `⊗` is
//! diagrammatic composition (`f ⊗ g = g ∘ f`), `0̄` is the constant-`⊥` map
//! and `1̄` is the identity.

use std::collections::{BTreeSet, VecDeque};
use std::sync::Arc;

use super::{parse_brace_set, render_set, AlgebraError, Carrier, FlowAlgebra};

pub const DEFAULT_CLOSURE_BOUND: usize = 4096;

/// A finite join-semilattice with a least element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lattice {
    names: Vec<String>,
    order_pairs: Vec<(usize, usize)>,
    leq: Vec<Vec<bool>>,
    join: Vec<Vec<usize>>,
    bottom: usize,
}

impl Lattice {
    /// Builds a lattice from its elements and generating pairs `lo ⊑ hi`.
    /// The order is the reflexive-transitive closure of the pairs.
    pub fn from_order<S: AsRef<str>>(elements: &[S], pairs: &[(S, S)]) -> Result<Self, AlgebraError> {
        let names: Vec<String> = elements.iter().map(|s| s.as_ref().to_string()).collect();
        if names.is_empty() {
            return Err(AlgebraError::BadLattice("no elements".into()));
        }
        let n = names.len();
        let index = |s: &str| {
            names
                .iter()
                .position(|x| x == s)
                .ok_or_else(|| AlgebraError::BadLattice(format!("unknown element `{s}`")))
        };
        for (i, name) in names.iter().enumerate() {
            if names[..i].contains(name) {
                return Err(AlgebraError::BadLattice(format!("duplicate element `{name}`")));
            }
        }
        let mut order_pairs = Vec::new();
        let mut leq = vec![vec![false; n]; n];
        for (i, row) in leq.iter_mut().enumerate() {
            row[i] = true;
        }
        for (lo, hi) in pairs {
            let (lo, hi) = (index(lo.as_ref())?, index(hi.as_ref())?);
            order_pairs.push((lo, hi));
            leq[lo][hi] = true;
        }
        order_pairs.sort_unstable();
        order_pairs.dedup();
        for k in 0..n {
            for i in 0..n {
                if leq[i][k] {
                    for j in 0..n {
                        if leq[k][j] {
                            leq[i][j] = true;
                        }
                    }
                }
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                if leq[i][j] && leq[j][i] {
                    return Err(AlgebraError::BadLattice(format!(
                        "order is not antisymmetric: `{}` and `{}`",
                        names[i], names[j]
                    )));
                }
            }
        }
        let bottom = (0..n)
            .find(|&b| (0..n).all(|x| leq[b][x]))
            .ok_or_else(|| AlgebraError::BadLattice("no least element".into()))?;
        let mut join = vec![vec![0; n]; n];
        for a in 0..n {
            for b in 0..n {
                let uppers: Vec<usize> = (0..n).filter(|&u| leq[a][u] && leq[b][u]).collect();
                join[a][b] = *uppers
                    .iter()
                    .find(|&&u| uppers.iter().all(|&v| leq[u][v]))
                    .ok_or_else(|| {
                        AlgebraError::BadLattice(format!(
                            "`{}` and `{}` have no least upper bound",
                            names[a], names[b]
                        ))
                    })?;
            }
        }
        Ok(Lattice {
            names,
            order_pairs,
            leq,
            join,
            bottom,
        })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn bottom(&self) -> usize {
        self.bottom
    }

    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.leq[a][b]
    }

    pub fn join(&self, a: usize, b: usize) -> usize {
        self.join[a][b]
    }

    fn header_params(&self) -> String {
        let pairs: Vec<String> = self
            .order_pairs
            .iter()
            .map(|&(lo, hi)| format!("{}<{}", self.names[lo], self.names[hi]))
            .collect();
        format!(
            "elements={} order={}",
            render_set(self.names.iter().map(String::as_str)),
            render_set(pairs.iter().map(String::as_str))
        )
    }
}

/// A total map on lattice indices: entry `i` is the image of element `i`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Table(pub Vec<usize>);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TabulatedAlgebra {
    lattice: Arc<Lattice>,
    carrier: Option<Vec<Table>>,
}

impl TabulatedAlgebra {
    /// The algebra of all monotone tables over `lattice`, with an abstract carrier.
    pub fn over(lattice: Lattice) -> Self {
        TabulatedAlgebra {
            lattice: Arc::new(lattice),
            carrier: None,
        }
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn identity(&self) -> Table {
        Table((0..self.lattice.len()).collect())
    }

    pub fn constant(&self, value: usize) -> Table {
        Table(vec![value; self.lattice.len()])
    }

    /// Validates shape and monotonicity of a table.
    pub fn check_table(&self, table: &Table) -> Result<(), AlgebraError> {
        let lat = &self.lattice;
        if table.0.len() != lat.len() || table.0.iter().any(|&v| v >= lat.len()) {
            return Err(AlgebraError::BadLiteral {
                algebra: "tabulated",
                text: format!("{:?}", table.0),
                reason: format!("a table needs exactly {} valid images", lat.len()),
            });
        }
        for lo in 0..lat.len() {
            for hi in 0..lat.len() {
                if lat.leq(lo, hi) && !lat.leq(table.0[lo], table.0[hi]) {
                    return Err(AlgebraError::NonMonotoneFunction {
                        function: self.render(table),
                        lo: lat.names[lo].clone(),
                        hi: lat.names[hi].clone(),
                        f_lo: lat.names[table.0[lo]].clone(),
                        f_hi: lat.names[table.0[hi]].clone(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Applies a table to a lattice element.
    pub fn apply(&self, table: &Table, element: usize) -> usize {
        table.0[element]
    }
}

pub fn tabulated_framework_algebra(
    lattice: Lattice,
    functions: &[Table],
) -> Result<TabulatedAlgebra, AlgebraError> {
    tabulated_framework_algebra_with_bound(lattice, functions, DEFAULT_CLOSURE_BOUND)
}

/// Builds the algebra whose carrier is the closure of `functions ∪ {id, f_⊥}`
/// under pointwise join and composition.
pub fn tabulated_framework_algebra_with_bound(
    lattice: Lattice,
    functions: &[Table],
    bound: usize,
) -> Result<TabulatedAlgebra, AlgebraError> {
    let open = TabulatedAlgebra::over(lattice);
    for f in functions {
        open.check_table(f)?;
    }
    let mut seen: BTreeSet<Table> = BTreeSet::new();
    let mut members: Vec<Table> = Vec::new();
    let mut queue: VecDeque<Table> = VecDeque::new();
    let seeds = [open.identity(), open.zero()]
        .into_iter()
        .chain(functions.iter().cloned());
    for f in seeds {
        if seen.insert(f.clone()) {
            queue.push_back(f);
        }
    }
    while let Some(f) = queue.pop_front() {
        members.push(f.clone());
        let mut fresh = Vec::new();
        for g in &members {
            fresh.push(open.combine(&f, g));
            fresh.push(open.extend(&f, g));
            fresh.push(open.extend(g, &f));
        }
        for h in fresh {
            if seen.insert(h.clone()) {
                if seen.len() > bound {
                    return Err(AlgebraError::ClosureExplosion { bound });
                }
                queue.push_back(h);
            }
        }
    }
    Ok(TabulatedAlgebra {
        lattice: open.lattice,
        carrier: Some(seen.into_iter().collect()),
    })
}

impl FlowAlgebra for TabulatedAlgebra {
    type Elem = Table;

    fn name(&self) -> &'static str {
        "tabulated"
    }

    fn header(&self) -> String {
        format!("algebra tabulated {}", self.lattice.header_params())
    }

    fn zero(&self) -> Table {
        self.constant(self.lattice.bottom())
    }

    fn one(&self) -> Table {
        self.identity()
    }

    fn combine(&self, a: &Table, b: &Table) -> Table {
        Table(
            a.0.iter()
                .zip(&b.0)
                .map(|(&x, &y)| self.lattice.join(x, y))
                .collect(),
        )
    }

    fn extend(&self, a: &Table, b: &Table) -> Table {
        Table(a.0.iter().map(|&x| b.0[x]).collect())
    }

    fn render(&self, a: &Table) -> String {
        let images: Vec<&str> = a.0.iter().map(|&i| self.lattice.names[i].as_str()).collect();
        format!("[{}]", images.join(","))
    }

    fn parse(&self, text: &str) -> Result<Table, AlgebraError> {
        let bad = |reason: String| AlgebraError::BadLiteral {
            algebra: "tabulated",
            text: text.to_string(),
            reason,
        };
        let inner = text
            .trim()
            .strip_prefix('[')
            .and_then(|s| s.strip_suffix(']'))
            .ok_or_else(|| bad("expected `[img,img,...]`".into()))?;
        let table = Table(
            inner
                .split(',')
                .map(|s| {
                    let s = s.trim();
                    self.lattice
                        .index_of(s)
                        .ok_or_else(|| bad(format!("unknown lattice element `{s}`")))
                })
                .collect::<Result<_, _>>()?,
        );
        self.check_table(&table)?;
        Ok(table)
    }

    fn carrier(&self) -> Carrier<Table> {
        match &self.carrier {
            Some(elems) => Carrier::Explicit(elems.clone()),
            None => Carrier::Abstract,
        }
    }
}

/// Parses the `elements={..} order={a<b,..}` header parameters.
pub(crate) fn parse_lattice_params(params: &str) -> Result<Lattice, AlgebraError> {
    let bad = |m: &str| AlgebraError::BadLattice(m.to_string());
    let rest = params
        .trim()
        .strip_prefix("elements=")
        .ok_or_else(|| bad("expected `elements={...} order={...}`"))?;
    let close = rest.find('}').ok_or_else(|| bad("unterminated element set"))?;
    let (elements, rest) = rest.split_at(close + 1);
    let elements = parse_brace_set(elements).ok_or_else(|| bad("malformed element set"))?;
    let order = rest
        .trim()
        .strip_prefix("order=")
        .ok_or_else(|| bad("expected `order={...}`"))?;
    let order = parse_brace_set(order).ok_or_else(|| bad("malformed order set"))?;
    let pairs = order
        .iter()
        .map(|p| {
            p.split_once('<')
                .map(|(a, b)| (a.trim(), b.trim()))
                .ok_or_else(|| bad("order pairs look like `lo<hi`"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Lattice::from_order(&elements, &pairs)
}
