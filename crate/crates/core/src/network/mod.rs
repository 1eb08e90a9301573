//! Per-unit network model: buses, generators, branches and the bus
//! admittance matrix.
//!
//! Cases are read from MATPOWER text ([`parse_case`]), validated, and
//! converted to per-unit on the case MVA base. Parallel branches between the
//! same bus pair are combined into a single [`Link`] whose two-port
//! admittances are the sums of the individual branch two-ports.

mod matpower;
mod ybus;

use std::collections::{BTreeMap, VecDeque};

use num_complex::Complex;
use serde::Serialize;

pub use matpower::{parse_case, write_case};
pub use ybus::{build_ybus, AdmittanceMatrix, YbusError};

use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BusKind {
    Slack,
    Generator,
    Load,
}

/// A bus. Powers are per-unit on the case base, angles in radians.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Bus<T> {
    /// External bus number from the case file.
    pub id: usize,
    pub kind: BusKind,
    pub pd: T,
    pub qd: T,
    pub vmin: T,
    pub vmax: T,
    pub gsh: T,
    pub bsh: T,
    /// Voltage magnitude and angle stored in the case (power-flow start).
    pub vm: T,
    pub va: T,
    pub base_kv: T,
}

/// A generating unit with quadratic cost `a p² + b p + c` (p in pu).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Generator<T> {
    /// Index into [`NetworkCase::buses`].
    pub bus: usize,
    pub pg: T,
    pub qg: T,
    pub vg: T,
    pub pmin: T,
    pub pmax: T,
    pub qmin: T,
    pub qmax: T,
    pub a: T,
    pub b: T,
    pub c: T,
}

/// A line or transformer. `from`/`to` index [`NetworkCase::buses`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Branch<T> {
    pub from: usize,
    pub to: usize,
    pub r: T,
    pub x: T,
    pub b_ch: T,
    /// Off-nominal turns ratio on the from side.
    pub tap: T,
    /// Phase shift in radians.
    pub shift: T,
    /// Real-power flow limit; `None` when unlimited.
    pub rate: Option<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetworkCase<T> {
    pub name: String,
    pub base_mva: T,
    pub buses: Vec<Bus<T>>,
    pub generators: Vec<Generator<T>>,
    pub branches: Vec<Branch<T>>,
}

/// All branches joining one bus pair, merged into a single two-port.
///
/// Admittances are oriented `from → to`; branches stored the other way
/// round contribute with their ends swapped.
#[derive(Debug, Clone, PartialEq)]
pub struct Link<T> {
    pub from: usize,
    pub to: usize,
    pub branches: Vec<usize>,
    pub y_ff: Complex<T>,
    pub y_ft: Complex<T>,
    pub y_tf: Complex<T>,
    pub y_tt: Complex<T>,
    /// Sum of member ratings, or `None` if any member is unlimited.
    pub rate: Option<T>,
}

impl<T: Scalar> Branch<T> {
    /// Two-port admittances `(y_ff, y_ft, y_tf, y_tt)` of the standard
    /// pi model with an ideal transformer on the from side.
    pub fn two_port(&self) -> Option<[Complex<T>; 4]> {
        let z = Complex::new(self.r, self.x);
        if z.norm_sqr() == T::zero() {
            return None;
        }
        let ys = z.inv();
        let half = Complex::new(T::zero(), self.b_ch / T::lit(2.0));
        let t = Complex::from_polar(self.tap, self.shift);
        let ytt = ys + half;
        let yff = ytt / (self.tap * self.tap);
        let yft = -ys / t.conj();
        let ytf = -ys / t;
        Some([yff, yft, ytf, ytt])
    }
}

impl<T: Scalar> NetworkCase<T> {
    /// Index of the slack bus.
    pub fn slack(&self) -> usize {
        self.buses
            .iter()
            .position(|b| b.kind == BusKind::Slack)
            .expect("validated case has a slack bus")
    }

    pub fn bus_index(&self, id: usize) -> Option<usize> {
        self.buses.iter().position(|b| b.id == id)
    }

    /// Generators grouped by bus index.
    pub fn gens_at(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.buses.len()];
        for (k, g) in self.generators.iter().enumerate() {
            out[g.bus].push(k);
        }
        out
    }

    /// Branches merged per unordered bus pair, in order of first appearance.
    ///
    /// Fails on a zero-impedance branch (index returned).
    pub fn links(&self) -> Result<Vec<Link<T>>, usize> {
        let mut pos: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut out: Vec<Link<T>> = Vec::new();
        let zero = Complex::new(T::zero(), T::zero());
        for (k, br) in self.branches.iter().enumerate() {
            let [ff, ft, tf, tt] = br.two_port().ok_or(k)?;
            let key = (br.from.min(br.to), br.from.max(br.to));
            let idx = *pos.entry(key).or_insert_with(|| {
                out.push(Link {
                    from: br.from,
                    to: br.to,
                    branches: Vec::new(),
                    y_ff: zero,
                    y_ft: zero,
                    y_tf: zero,
                    y_tt: zero,
                    rate: Some(T::zero()),
                });
                out.len() - 1
            });
            let link = &mut out[idx];
            if link.from == br.from {
                link.y_ff = link.y_ff + ff;
                link.y_ft = link.y_ft + ft;
                link.y_tf = link.y_tf + tf;
                link.y_tt = link.y_tt + tt;
            } else {
                link.y_ff = link.y_ff + tt;
                link.y_ft = link.y_ft + tf;
                link.y_tf = link.y_tf + ft;
                link.y_tt = link.y_tt + ff;
            }
            link.rate = match (link.rate, br.rate) {
                (Some(a), Some(b)) => Some(a + b),
                _ => None,
            };
            link.branches.push(k);
        }
        Ok(out)
    }

    /// Connected components of the bus graph, each as a sorted list of bus indices.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.buses.len();
        let mut adj = vec![Vec::new(); n];
        for br in &self.branches {
            adj[br.from].push(br.to);
            adj[br.to].push(br.from);
        }
        let mut seen = vec![false; n];
        let mut comps = Vec::new();
        for s in 0..n {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut comp = vec![s];
            let mut q = VecDeque::from([s]);
            while let Some(u) = q.pop_front() {
                for &v in &adj[u] {
                    if !seen[v] {
                        seen[v] = true;
                        comp.push(v);
                        q.push_back(v);
                    }
                }
            }
            comp.sort_unstable();
            comps.push(comp);
        }
        comps
    }

    pub fn total_load(&self) -> (T, T) {
        self.buses
            .iter()
            .fold((T::zero(), T::zero()), |(p, q), b| (p + b.pd, q + b.qd))
    }
}

impl<T: Scalar + Serialize> NetworkCase<T> {
    /// Canonical pretty-printed JSON of the parsed case.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("case serializes")
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CaseError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("missing `mpc.{0}`")]
    Missing(&'static str),
    #[error("line {line}: duplicate bus id {id}")]
    DuplicateBus { line: usize, id: usize },
    #[error("line {line}: reference to unknown bus {id}")]
    DanglingBus { line: usize, id: usize },
    #[error("no slack bus")]
    NoSlack,
    #[error("more than one slack bus: {0:?}")]
    MultipleSlack(Vec<usize>),
    #[error("network is disconnected: {components} components (bus {example} not reachable from the slack)")]
    Disconnected { components: usize, example: usize },
    #[error("line {line}: {msg}")]
    Invalid { line: usize, msg: String },
    #[error("{0}")]
    Io(String),
}

/// Reads and parses a MATPOWER case file; the name defaults to the file stem.
pub fn load_case<T: Scalar>(path: &std::path::Path) -> Result<NetworkCase<T>, CaseError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CaseError::Io(format!("{}: {e}", path.display())))?;
    let mut case = parse_case(&text)?;
    if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
        case.name = stem.to_string();
    }
    Ok(case)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn branch(from: usize, to: usize, x: f64, rate: Option<f64>) -> Branch<f64> {
        Branch {
            from,
            to,
            r: 0.0,
            x,
            b_ch: 0.0,
            tap: 1.0,
            shift: 0.0,
            rate,
        }
    }

    fn case_with(branches: Vec<Branch<f64>>) -> NetworkCase<f64> {
        let bus = |id, kind| Bus {
            id,
            kind,
            pd: 0.0,
            qd: 0.0,
            vmin: 0.9,
            vmax: 1.1,
            gsh: 0.0,
            bsh: 0.0,
            vm: 1.0,
            va: 0.0,
            base_kv: 0.0,
        };
        NetworkCase {
            name: "t".into(),
            base_mva: 100.0,
            buses: vec![
                bus(1, BusKind::Slack),
                bus(2, BusKind::Load),
                bus(3, BusKind::Load),
            ],
            generators: vec![],
            branches,
        }
    }

    #[test]
    fn parallel_branches_merge_with_orientation() {
        let c = case_with(vec![
            branch(0, 1, 0.1, Some(1.0)),
            branch(1, 2, 0.2, None),
            branch(1, 0, 0.1, Some(0.5)),
        ]);
        let links = c.links().unwrap();
        assert_eq!(links.len(), 2);
        assert_eq!(links[0].branches, vec![0, 2]);
        assert!((links[0].y_ft.im - 20.0).abs() < 1e-12);
        assert!((links[0].y_ff.im + 20.0).abs() < 1e-12);
        assert_eq!(links[0].rate, Some(1.5));
        assert_eq!(links[1].rate, None);
    }

    #[test]
    fn tapped_two_port_matches_hand_values() {
        let br: Branch<f64> = Branch {
            from: 0,
            to: 1,
            r: 0.0,
            x: 0.5,
            b_ch: 0.0,
            tap: 2.0,
            shift: 0.0,
            rate: None,
        };
        let [ff, ft, tf, tt] = br.two_port().unwrap();
        // ys = -2j
        assert!((tt.im + 2.0).abs() < 1e-15);
        assert!((ff.im + 0.5).abs() < 1e-15);
        assert!((ft.im - 1.0).abs() < 1e-15);
        assert!((tf.im - 1.0).abs() < 1e-15);
    }

    #[test]
    fn components_detect_islands() {
        let c = case_with(vec![branch(0, 1, 0.1, None)]);
        assert_eq!(c.components(), vec![vec![0, 1], vec![2]]);
    }
}
