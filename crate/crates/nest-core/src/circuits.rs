//! Parameterized circuits, Pauli-sum observables, and map-aware routing.

use std::collections::BTreeMap;
use std::path::Path;

use crate::device::DeviceSnapshot;
use crate::error::{Error, Result};
use crate::mapping::CircuitMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GateOp {
    Ry,
    Rz,
    Rx,
    H,
    Cx,
    Swap,
    Measure,
}

impl GateOp {
    pub fn arity(self) -> usize {
        match self {
            GateOp::Cx | GateOp::Swap => 2,
            _ => 1,
        }
    }

    pub fn is_rotation(self) -> bool {
        matches!(self, GateOp::Ry | GateOp::Rz | GateOp::Rx)
    }
}

/// Rotation angle: either `scale * theta[index]` or a fixed constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Angle {
    Bound { index: usize, scale: f64 },
    Fixed(f64),
}

impl Angle {
    pub fn resolve(&self, params: &[f64]) -> f64 {
        match *self {
            Angle::Bound { index, scale } => scale * params[index],
            Angle::Fixed(v) => v,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub op: GateOp,
    pub qubits: Vec<usize>,
    pub angle: Option<Angle>,
}

impl Gate {
    fn one(op: GateOp, q: usize, angle: Option<Angle>) -> Self {
        Gate {
            op,
            qubits: vec![q],
            angle,
        }
    }

    fn two(op: GateOp, a: usize, b: usize) -> Self {
        Gate {
            op,
            qubits: vec![a, b],
            angle: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamCircuit {
    pub num_qubits: usize,
    pub gates: Vec<Gate>,
    pub num_params: usize,
}

impl ParamCircuit {
    /// Validates arities, parameter indices, qubit ranges, and terminal
    /// placement of measurements.
    pub fn new(num_qubits: usize, gates: Vec<Gate>, num_params: usize) -> Result<Self> {
        let mut used = vec![false; num_params];
        let mut measured = vec![false; num_qubits];
        for g in &gates {
            if g.qubits.len() != g.op.arity() {
                return Err(Error::InvalidArity(format!(
                    "{:?} takes {} qubits, got {}",
                    g.op,
                    g.op.arity(),
                    g.qubits.len()
                )));
            }
            for &q in &g.qubits {
                if q >= num_qubits {
                    return Err(Error::IndexOutOfRange {
                        index: q,
                        limit: num_qubits,
                    });
                }
                if measured[q] {
                    return Err(Error::InvalidArity(format!(
                        "gate {:?} on qubit {q} after its measurement",
                        g.op
                    )));
                }
            }
            if g.op.arity() == 2 && g.qubits[0] == g.qubits[1] {
                return Err(Error::InvalidArity(format!(
                    "{:?} needs two distinct qubits",
                    g.op
                )));
            }
            if g.op.is_rotation() != g.angle.is_some() {
                return Err(Error::InvalidArity(format!(
                    "{:?} angle mismatch",
                    g.op
                )));
            }
            if let Some(Angle::Bound { index, .. }) = g.angle {
                if index >= num_params {
                    return Err(Error::ParamLengthMismatch {
                        expected: num_params,
                        got: index + 1,
                    });
                }
                used[index] = true;
            }
            if g.op == GateOp::Measure {
                measured[g.qubits[0]] = true;
            }
        }
        if let Some(missing) = used.iter().position(|u| !u) {
            return Err(Error::ParamLengthMismatch {
                expected: num_params,
                got: missing,
            });
        }
        Ok(ParamCircuit {
            num_qubits,
            gates,
            num_params,
        })
    }
}

/// Hardware-efficient ansatz: alternating RY/RZ rotation layers with
/// linear CX entanglement between them and a final rotation layer.
pub fn efficient_su2(n: usize, reps: usize) -> Result<ParamCircuit> {
    if n < 1 {
        return Err(Error::InvalidArity("ansatz needs at least one qubit".into()));
    }
    let mut gates = Vec::new();
    let mut next_param = 0usize;
    let mut rotation_layer = |gates: &mut Vec<Gate>| {
        for op in [GateOp::Ry, GateOp::Rz] {
            for q in 0..n {
                gates.push(Gate::one(
                    op,
                    q,
                    Some(Angle::Bound {
                        index: next_param,
                        scale: 1.0,
                    }),
                ));
                next_param += 1;
            }
        }
    };
    rotation_layer(&mut gates);
    for _ in 0..reps {
        for q in 0..n.saturating_sub(1) {
            gates.push(Gate::two(GateOp::Cx, q, q + 1));
        }
        rotation_layer(&mut gates);
    }
    debug_assert_eq!(next_param, 2 * n * (reps + 1));
    ParamCircuit::new(n, gates, next_param)
}

// ---------------------------------------------------------------------------
// Pauli Hamiltonians
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum PauliOp {
    I,
    X,
    Y,
    Z,
}

impl PauliOp {
    fn from_char(c: char) -> Option<Self> {
        match c {
            'I' => Some(PauliOp::I),
            'X' => Some(PauliOp::X),
            'Y' => Some(PauliOp::Y),
            'Z' => Some(PauliOp::Z),
            _ => None,
        }
    }

    fn as_char(self) -> char {
        match self {
            PauliOp::I => 'I',
            PauliOp::X => 'X',
            PauliOp::Y => 'Y',
            PauliOp::Z => 'Z',
        }
    }
}

/// One weighted Pauli string; character position = qubit index.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliTerm {
    pub coeff: f64,
    pub ops: Vec<PauliOp>,
}

impl PauliTerm {
    pub fn parse(coeff: f64, label: &str) -> Result<Self> {
        let ops = label
            .chars()
            .map(|c| {
                PauliOp::from_char(c)
                    .ok_or_else(|| Error::parse("pauli string", format!("invalid letter `{c}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PauliTerm { coeff, ops })
    }

    pub fn label(&self) -> String {
        self.ops.iter().map(|p| p.as_char()).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.ops.iter().all(|&p| p == PauliOp::I)
    }

    /// Qubits carrying X or Y (need a basis rotation before measuring).
    pub fn x_support(&self) -> impl Iterator<Item = (usize, PauliOp)> + '_ {
        self.ops
            .iter()
            .enumerate()
            .filter(|(_, &p)| p == PauliOp::X || p == PauliOp::Y)
            .map(|(q, &p)| (q, p))
    }

    /// Qubits contributing to the measured parity (any non-identity).
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.ops
            .iter()
            .enumerate()
            .filter(|(_, &p)| p != PauliOp::I)
            .map(|(q, _)| q)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PauliHamiltonian {
    pub num_qubits: usize,
    pub terms: Vec<PauliTerm>,
}

impl PauliHamiltonian {
    /// Merges duplicate strings and validates lengths/finiteness.
    pub fn new(num_qubits: usize, terms: Vec<PauliTerm>) -> Result<Self> {
        let mut merged: BTreeMap<String, f64> = BTreeMap::new();
        for t in terms {
            if t.ops.len() != num_qubits {
                return Err(Error::LengthMismatch(format!(
                    "pauli string `{}` has length {}, hamiltonian is on {num_qubits} qubits",
                    t.label(),
                    t.ops.len()
                )));
            }
            if !t.coeff.is_finite() {
                return Err(Error::Domain(format!(
                    "non-finite coefficient for `{}`",
                    t.label()
                )));
            }
            *merged.entry(t.label()).or_insert(0.0) += t.coeff;
        }
        let terms = merged
            .into_iter()
            .map(|(label, coeff)| PauliTerm::parse(coeff, &label))
            .collect::<Result<Vec<_>>>()?;
        Ok(PauliHamiltonian { num_qubits, terms })
    }

    /// Sum of identity-term coefficients (handled analytically).
    pub fn identity_offset(&self) -> f64 {
        self.terms
            .iter()
            .filter(|t| t.is_identity())
            .map(|t| t.coeff)
            .sum()
    }

    pub fn sampled_terms(&self) -> impl Iterator<Item = &PauliTerm> {
        self.terms.iter().filter(|t| !t.is_identity())
    }
}

/// Parses the "coeff PAULISTRING" text format; `#` starts a comment.
pub fn parse_hamiltonian(text: &str, context: &str) -> Result<PauliHamiltonian> {
    let mut terms: Vec<PauliTerm> = Vec::new();
    let mut width: Option<usize> = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut it = line.split_whitespace();
        let coeff_tok = it.next().unwrap();
        let label = it.next().ok_or_else(|| {
            Error::parse(context, format!("line {}: missing pauli string", lineno + 1))
        })?;
        if it.next().is_some() {
            return Err(Error::parse(
                context,
                format!("line {}: trailing tokens", lineno + 1),
            ));
        }
        let coeff: f64 = coeff_tok
            .parse()
            .map_err(|e| Error::parse(context, format!("line {}: {e}", lineno + 1)))?;
        let term = PauliTerm::parse(coeff, label)
            .map_err(|e| Error::parse(context, format!("line {}: {e}", lineno + 1)))?;
        match width {
            None => width = Some(term.ops.len()),
            Some(w) if w != term.ops.len() => {
                return Err(Error::LengthMismatch(format!(
                    "{context}: line {} has width {}, expected {w}",
                    lineno + 1,
                    term.ops.len()
                )))
            }
            _ => {}
        }
        terms.push(term);
    }
    let width = width.ok_or_else(|| Error::parse(context, "no terms"))?;
    PauliHamiltonian::new(width, terms)
}

pub fn load_hamiltonian(path: impl AsRef<Path>) -> Result<PauliHamiltonian> {
    let path = path.as_ref();
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    parse_hamiltonian(&text, &path.display().to_string())
}

// ---------------------------------------------------------------------------
// Graphs (MaxCut instances)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    pub num_vertices: usize,
    pub edges: Vec<(usize, usize, f64)>,
}

impl Graph {
    pub fn new(num_vertices: usize, edges: Vec<(usize, usize, f64)>) -> Result<Self> {
        if edges.is_empty() {
            return Err(Error::EmptyGraph);
        }
        for &(u, v, w) in &edges {
            if u >= num_vertices || v >= num_vertices || u == v || !w.is_finite() {
                return Err(Error::parse("graph", format!("bad edge ({u}, {v}, {w})")));
            }
        }
        Ok(Graph {
            num_vertices,
            edges,
        })
    }

    /// Cut value of the partition encoded by bit i of `assignment`.
    pub fn cut_value(&self, assignment: u64) -> f64 {
        self.edges
            .iter()
            .map(|&(u, v, w)| {
                if (assignment >> u) & 1 != (assignment >> v) & 1 {
                    w
                } else {
                    0.0
                }
            })
            .sum()
    }

    pub fn is_connected(&self) -> bool {
        let mut adj = vec![Vec::new(); self.num_vertices];
        for &(u, v, _) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        let mut seen = vec![false; self.num_vertices];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}

/// Parses "u v [weight]" lines, default weight 1; `#` starts a comment.
pub fn parse_graph(text: &str, context: &str) -> Result<Graph> {
    let mut edges = Vec::new();
    let mut max_v = 0usize;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() < 2 || toks.len() > 3 {
            return Err(Error::parse(
                context,
                format!("line {}: expected `u v [weight]`", lineno + 1),
            ));
        }
        let u: usize = toks[0]
            .parse()
            .map_err(|e| Error::parse(context, format!("line {}: {e}", lineno + 1)))?;
        let v: usize = toks[1]
            .parse()
            .map_err(|e| Error::parse(context, format!("line {}: {e}", lineno + 1)))?;
        let w: f64 = match toks.get(2) {
            Some(t) => t
                .parse()
                .map_err(|e| Error::parse(context, format!("line {}: {e}", lineno + 1)))?,
            None => 1.0,
        };
        max_v = max_v.max(u).max(v);
        edges.push((u, v, w));
    }
    if edges.is_empty() {
        return Err(Error::EmptyGraph);
    }
    Graph::new(max_v + 1, edges)
}

pub fn load_graph(path: impl AsRef<Path>) -> Result<Graph> {
    let path = path.as_ref();
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    parse_graph(&text, &path.display().to_string())
}

/// One-layer QAOA for MaxCut: H on all qubits, a CX-RZ-CX phase block
/// per edge driven by the shared parameter gamma (scaled by twice the
/// edge weight), then RX(2 beta) mixers. The returned Hamiltonian is
/// sum over edges of (w/2)(Z_u Z_v - I), whose minimum over basis states
/// is minus the maximum cut value.
pub fn qaoa_maxcut(graph: &Graph, p: usize) -> Result<(ParamCircuit, PauliHamiltonian)> {
    if p != 1 {
        return Err(Error::Unsupported("only one-layer (p = 1) QAOA".into()));
    }
    if graph.edges.is_empty() {
        return Err(Error::EmptyGraph);
    }
    let n = graph.num_vertices;
    let mut gates = Vec::new();
    for q in 0..n {
        gates.push(Gate::one(GateOp::H, q, None));
    }
    for &(u, v, w) in &graph.edges {
        gates.push(Gate::two(GateOp::Cx, u, v));
        gates.push(Gate::one(
            GateOp::Rz,
            v,
            Some(Angle::Bound {
                index: 0,
                scale: 2.0 * w,
            }),
        ));
        gates.push(Gate::two(GateOp::Cx, u, v));
    }
    for q in 0..n {
        gates.push(Gate::one(
            GateOp::Rx,
            q,
            Some(Angle::Bound {
                index: 1,
                scale: 2.0,
            }),
        ));
    }
    let circuit = ParamCircuit::new(n, gates, 2)?;

    let mut terms = Vec::new();
    for &(u, v, w) in &graph.edges {
        let mut ops = vec![PauliOp::I; n];
        ops[u] = PauliOp::Z;
        ops[v] = PauliOp::Z;
        terms.push(PauliTerm {
            coeff: w / 2.0,
            ops,
        });
        terms.push(PauliTerm {
            coeff: -w / 2.0,
            ops: vec![PauliOp::I; n],
        });
    }
    let hamiltonian = PauliHamiltonian::new(n, terms)?;
    Ok((circuit, hamiltonian))
}

// ---------------------------------------------------------------------------
// Routing
// ---------------------------------------------------------------------------

/// Circuit lowered onto physical qubits of one map; every two-qubit gate
/// acts on a coupling-graph edge.
#[derive(Debug, Clone)]
pub struct RoutedCircuit {
    pub num_qubits: usize,
    pub num_params: usize,
    pub gates: Vec<Gate>,
    pub source_map: CircuitMap,
    pub inserted_swap_count: usize,
    /// Logical qubit -> physical qubit after all inserted swaps.
    pub final_layout: Vec<usize>,
}

/// Lexicographically-smallest shortest path between two physical qubits,
/// restricted to the map's qubit set.
fn shortest_path_in_set(
    snapshot: &DeviceSnapshot,
    allowed: &[usize],
    from: usize,
    to: usize,
) -> Option<Vec<usize>> {
    let in_set = |q: usize| allowed.binary_search(&q).is_ok();
    let mut dist: BTreeMap<usize, usize> = BTreeMap::new();
    dist.insert(to, 0);
    let mut queue = std::collections::VecDeque::from([to]);
    while let Some(x) = queue.pop_front() {
        for &y in snapshot.neighbors(x) {
            if in_set(y) && !dist.contains_key(&y) {
                dist.insert(y, dist[&x] + 1);
                queue.push_back(y);
            }
        }
    }
    let mut path = vec![from];
    let mut cur = from;
    let mut d = *dist.get(&from)?;
    while cur != to {
        let next = snapshot
            .neighbors(cur)
            .iter()
            .copied()
            .filter(|&y| in_set(y) && dist.get(&y) == Some(&(d - 1)))
            .min()?;
        path.push(next);
        cur = next;
        d -= 1;
    }
    Some(path)
}

/// Lowers a logical circuit onto a map, inserting SWAPs along shortest
/// in-map paths for two-qubit gates on non-adjacent physical qubits. The
/// induced permutation is tracked and folded into measurement labels.
pub fn route(
    circuit: &ParamCircuit,
    map: &CircuitMap,
    snapshot: &DeviceSnapshot,
) -> Result<RoutedCircuit> {
    if circuit.num_qubits != map.len() {
        return Err(Error::LengthMismatch(format!(
            "circuit has {} qubits, map has {}",
            circuit.num_qubits,
            map.len()
        )));
    }
    let allowed = map.sorted_physical();
    let mut pos: Vec<usize> = map.assignment().to_vec(); // logical -> physical
    let mut gates = Vec::with_capacity(circuit.gates.len());
    let mut swaps = 0usize;
    for g in &circuit.gates {
        match g.op.arity() {
            1 => {
                gates.push(Gate {
                    op: g.op,
                    qubits: vec![pos[g.qubits[0]]],
                    angle: g.angle,
                });
            }
            _ => {
                let (la, lb) = (g.qubits[0], g.qubits[1]);
                let (mut pa, pb) = (pos[la], pos[lb]);
                if !snapshot.has_edge(pa, pb) {
                    let path = shortest_path_in_set(snapshot, &allowed, pa, pb)
                        .ok_or(Error::UnroutableGate(pa, pb))?;
                    // Walk the first operand until it neighbors the second.
                    for win in path.windows(2).take(path.len() - 2) {
                        let (x, y) = (win[0], win[1]);
                        gates.push(Gate::two(GateOp::Swap, x, y));
                        swaps += 1;
                        for p in pos.iter_mut() {
                            if *p == x {
                                *p = y;
                            } else if *p == y {
                                *p = x;
                            }
                        }
                    }
                    pa = path[path.len() - 2];
                    debug_assert_eq!(pos[la], pa);
                }
                gates.push(Gate {
                    op: g.op,
                    qubits: vec![pos[la], pos[lb]],
                    angle: g.angle,
                });
            }
        }
    }
    Ok(RoutedCircuit {
        num_qubits: circuit.num_qubits,
        num_params: circuit.num_params,
        gates,
        source_map: map.clone(),
        inserted_swap_count: swaps,
        final_layout: pos,
    })
}

/// ASAP layering over non-measurement gates: a gate lands one layer after
/// the latest prior gate touching any of its qubits. Returns per-gate
/// layer indices (measure gates get `usize::MAX`) and the layer count.
pub fn asap_layers(gates: &[Gate]) -> (Vec<usize>, usize) {
    let mut last: BTreeMap<usize, usize> = BTreeMap::new();
    let mut layers = Vec::with_capacity(gates.len());
    let mut depth = 0usize;
    for g in gates {
        if g.op == GateOp::Measure {
            layers.push(usize::MAX);
            continue;
        }
        let layer = g
            .qubits
            .iter()
            .map(|q| last.get(q).map_or(0, |l| l + 1))
            .max()
            .unwrap_or(0);
        for &q in &g.qubits {
            last.insert(q, layer);
        }
        layers.push(layer);
        depth = depth.max(layer + 1);
    }
    (layers, depth)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::{data_dir, load_snapshot};
    use crate::mapping::CircuitMap;

    fn line5() -> DeviceSnapshot {
        load_snapshot(data_dir().join("devices/line5.json")).unwrap()
    }

    #[test]
    fn su2_single_qubit_no_entanglement() {
        let c = efficient_su2(1, 0).unwrap();
        assert_eq!(c.num_params, 2);
        assert_eq!(c.gates.len(), 2);
        assert_eq!(c.gates[0].op, GateOp::Ry);
        assert_eq!(c.gates[1].op, GateOp::Rz);
    }

    #[test]
    fn su2_parameter_and_entangler_counts() {
        let c = efficient_su2(4, 3).unwrap();
        assert_eq!(c.num_params, 32);
        let cx = c.gates.iter().filter(|g| g.op == GateOp::Cx).count();
        assert_eq!(cx, 9);
    }

    #[test]
    fn su2_two_qubit_gate_sequence() {
        let c = efficient_su2(2, 1).unwrap();
        let ops: Vec<GateOp> = c.gates.iter().map(|g| g.op).collect();
        use GateOp::*;
        assert_eq!(ops, vec![Ry, Ry, Rz, Rz, Cx, Ry, Ry, Rz, Rz]);
    }

    #[test]
    fn hamiltonian_merges_duplicates() {
        let h = parse_hamiltonian("1.0 ZZ\n2.0 ZZ\n", "test").unwrap();
        assert_eq!(h.num_qubits, 2);
        assert_eq!(h.terms.len(), 1);
        assert!((h.terms[0].coeff - 3.0).abs() < 1e-15);
    }

    #[test]
    fn hamiltonian_rejects_bad_letters() {
        assert!(matches!(
            parse_hamiltonian("1.0 ZQ\n", "test"),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            parse_hamiltonian("1.0 ZZ\n0.5 ZZZ\n", "test"),
            Err(Error::LengthMismatch(_))
        ));
    }

    #[test]
    fn single_term_file() {
        let h = parse_hamiltonian("# comment\n1.0 ZZ\n", "test").unwrap();
        assert_eq!(h.num_qubits, 2);
        assert_eq!(h.terms[0].label(), "ZZ");
    }

    #[test]
    fn qaoa_hamiltonian_basis_energy_is_minus_cut() {
        let g = Graph::new(3, vec![(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap();
        let (circuit, h) = qaoa_maxcut(&g, 1).unwrap();
        assert_eq!(circuit.num_params, 2);
        // diagonal energy of basis state z equals -cut(z)
        for z in 0u64..8 {
            let mut energy = 0.0;
            for t in &h.terms {
                let mut sign = 1.0;
                for (q, &p) in t.ops.iter().enumerate() {
                    if p == PauliOp::Z && (z >> q) & 1 == 1 {
                        sign = -sign;
                    }
                }
                energy += t.coeff * sign;
            }
            assert!((energy + g.cut_value(z)).abs() < 1e-12, "z={z}");
        }
    }

    #[test]
    fn qaoa_ten_vertex_instance_shape() {
        let g = crate::circuits::load_graph(data_dir().join("graphs/g10_21.txt")).unwrap();
        assert!(g.is_connected());
        assert_eq!(g.num_vertices, 10);
        assert_eq!(g.edges.len(), 21);
        let (circuit, _) = qaoa_maxcut(&g, 1).unwrap();
        let rz = circuit.gates.iter().filter(|x| x.op == GateOp::Rz).count();
        assert_eq!(rz, 21);
        assert_eq!(circuit.num_params, 2);
    }

    #[test]
    fn routing_adjacent_gate_needs_no_swaps() {
        let snap = line5();
        let map = CircuitMap::new(vec![1, 2], &snap).unwrap();
        let c = ParamCircuit::new(2, vec![Gate::two(GateOp::Cx, 0, 1)], 0).unwrap();
        let r = route(&c, &map, &snap).unwrap();
        assert_eq!(r.inserted_swap_count, 0);
        assert_eq!(r.gates.len(), 1);
        assert_eq!(r.gates[0].qubits, vec![1, 2]);
    }

    #[test]
    fn routing_distant_gate_inserts_one_swap() {
        let snap = line5();
        let map = CircuitMap::new(vec![0, 1, 2], &snap).unwrap();
        let c = ParamCircuit::new(3, vec![Gate::two(GateOp::Cx, 0, 2)], 0).unwrap();
        let r = route(&c, &map, &snap).unwrap();
        assert_eq!(r.inserted_swap_count, 1);
        assert_eq!(r.gates[0].op, GateOp::Swap);
        assert_eq!(r.gates[0].qubits, vec![0, 1]);
        assert_eq!(r.gates[1].qubits, vec![1, 2]);
        // logical 0 now lives on physical 1
        assert_eq!(r.final_layout, vec![1, 0, 2]);
    }

    #[test]
    fn su2_routes_swap_free_on_path_maps() {
        let snap = line5();
        let map = CircuitMap::new(vec![0, 1, 2, 3], &snap).unwrap();
        let c = efficient_su2(4, 3).unwrap();
        let r = route(&c, &map, &snap).unwrap();
        assert_eq!(r.inserted_swap_count, 0);
    }

    #[test]
    fn asap_depth_counts_parallel_gates_once() {
        let c = efficient_su2(2, 1).unwrap();
        let (_, depth) = asap_layers(&c.gates);
        // RY layer, RZ layer, CX, RY, RZ
        assert_eq!(depth, 5);
    }
}
