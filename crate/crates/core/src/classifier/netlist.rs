//! Lowering of a pair classifier to a DAG of min/max/subtract/compare gates.
//!
//! Max and min neurons become left-folded chains of `max2`/`min2`. Other
//! order statistics are read off one wire of an odd-even transposition
//! sorting network; gates that do not feed the selected wire are dropped.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectra::Sign;

use super::{decide, PairClassifier, QuantileNeuron};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Op {
    Input,
    Min2,
    Max2,
    Subtract,
    Compare,
}

/// One gate. `args` holds upstream node ids; `input` nodes carry the 1-based
/// spectral `index` instead, and the `compare` node carries `theta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: usize,
    pub op: Op,
    pub args: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Netlist {
    pub nodes: Vec<Node>,
    pub output: usize,
}

#[derive(Default)]
struct Builder {
    nodes: Vec<Node>,
    inputs: Vec<(usize, usize)>,
}

impl Builder {
    fn push(&mut self, op: Op, args: Vec<usize>) -> usize {
        let id = self.nodes.len();
        self.nodes.push(Node {
            id,
            op,
            args,
            index: None,
            theta: None,
        });
        id
    }

    fn input(&mut self, index: usize) -> usize {
        if let Some(&(_, id)) = self.inputs.iter().find(|(i, _)| *i == index) {
            return id;
        }
        let id = self.push(Op::Input, Vec::new());
        self.nodes[id].index = Some(index);
        self.inputs.push((index, id));
        id
    }

    fn fold(&mut self, op: Op, wires: &[usize]) -> usize {
        let mut acc = wires[0];
        for &w in &wires[1..] {
            acc = self.push(op, vec![acc, w]);
        }
        acc
    }

    fn select(&mut self, neuron: &QuantileNeuron) -> usize {
        let range = neuron.range();
        let wires: Vec<usize> = (range.start()..=range.end()).map(|i| self.input(i)).collect();
        let k = neuron.order_index();
        let w = wires.len();
        if w == 1 {
            return wires[0];
        }
        if k == w {
            return self.fold(Op::Max2, &wires);
        }
        if k == 1 {
            return self.fold(Op::Min2, &wires);
        }
        let mut lanes = wires;
        for round in 0..w {
            let mut i = round % 2;
            while i + 1 < w {
                let lo = self.push(Op::Min2, vec![lanes[i], lanes[i + 1]]);
                let hi = self.push(Op::Max2, vec![lanes[i], lanes[i + 1]]);
                lanes[i] = lo;
                lanes[i + 1] = hi;
                i += 2;
            }
        }
        lanes[k - 1]
    }

    /// Drops nodes not reachable from `output` and renumbers the rest in order.
    fn finish(self, output: usize) -> Netlist {
        let mut live = vec![false; self.nodes.len()];
        live[output] = true;
        for id in (0..=output).rev() {
            if live[id] {
                for &a in &self.nodes[id].args {
                    live[a] = true;
                }
            }
        }
        let mut remap = vec![usize::MAX; self.nodes.len()];
        let mut nodes = Vec::new();
        for node in self.nodes.into_iter() {
            if !live[node.id] {
                continue;
            }
            let id = nodes.len();
            remap[node.id] = id;
            nodes.push(Node {
                id,
                args: node.args.iter().map(|a| remap[*a]).collect(),
                ..node
            });
        }
        Netlist {
            output: remap[output],
            nodes,
        }
    }
}

pub fn to_netlist(c: &PairClassifier) -> Netlist {
    let mut b = Builder::default();
    let pos = b.select(&c.pos_neuron());
    let neg = b.select(&c.neg_neuron());
    let diff = b.push(Op::Subtract, vec![pos, neg]);
    let cmp = b.push(Op::Compare, vec![diff]);
    b.nodes[cmp].theta = Some(c.theta());
    b.finish(cmp)
}

impl Netlist {
    /// Checks ids, arity, topological wiring and the single compare output.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Netlist(msg));
        let mut compares = 0;
        for (pos, node) in self.nodes.iter().enumerate() {
            if node.id != pos {
                return bad(format!("node at position {pos} has id {}", node.id));
            }
            let arity = match node.op {
                Op::Input => 0,
                Op::Compare => 1,
                Op::Min2 | Op::Max2 | Op::Subtract => 2,
            };
            if node.args.len() != arity {
                return bad(format!("node {pos}: {:?} takes {arity} args", node.op));
            }
            if let Some(&a) = node.args.iter().find(|&&a| a >= pos) {
                return bad(format!("node {pos} reads node {a}, which is not upstream"));
            }
            match node.op {
                Op::Input if node.index.is_none_or(|i| i == 0) => {
                    return bad(format!("input node {pos} has no 1-based index"));
                }
                Op::Compare => {
                    compares += 1;
                    if !node.theta.is_some_and(f64::is_finite) {
                        return bad(format!("compare node {pos} has no finite theta"));
                    }
                }
                _ => {}
            }
        }
        if compares != 1 {
            return bad(format!("expected exactly one compare node, found {compares}"));
        }
        match self.nodes.get(self.output) {
            Some(n) if n.op == Op::Compare => Ok(()),
            _ => bad(format!("output {} is not the compare node", self.output)),
        }
    }

    /// Evaluates the netlist on a spectrum (0-based storage of 1-based indices).
    pub fn simulate(&self, values: &[f64]) -> Result<Sign> {
        let mut wire = vec![0.0f64; self.nodes.len()];
        let mut out = None;
        for node in &self.nodes {
            wire[node.id] = match node.op {
                Op::Input => {
                    let i = node.index.unwrap_or(0);
                    if i == 0 || i > values.len() {
                        return Err(Error::Netlist(format!(
                            "input index {i} outside spectrum of length {}",
                            values.len()
                        )));
                    }
                    values[i - 1]
                }
                Op::Min2 => wire[node.args[0]].min(wire[node.args[1]]),
                Op::Max2 => wire[node.args[0]].max(wire[node.args[1]]),
                Op::Subtract => wire[node.args[0]] - wire[node.args[1]],
                Op::Compare => {
                    let sign = decide(wire[node.args[0]], node.theta.unwrap_or(0.0));
                    out = Some(sign);
                    sign.value() as f64
                }
            };
        }
        out.ok_or_else(|| Error::Netlist("no compare node".into()))
    }

    pub fn count(&self, op: Op) -> usize {
        self.nodes.iter().filter(|n| n.op == op).count()
    }
}
