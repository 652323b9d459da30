//! CART-style least-squares regression tree on the two beam angles.

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TreeConfig {
    pub max_depth: usize,
    /// Minimum number of samples on each side of a split.
    pub min_leaf: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Node {
    Leaf {
        value: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// Axis-aligned binary tree; inputs with `x[feature] <= threshold` go left.
#[derive(Clone, Debug, PartialEq)]
pub struct RegressionTree {
    nodes: Vec<Node>,
    depth: usize,
}

struct Candidate {
    feature: usize,
    threshold: f64,
    gain: f64,
    split_at: usize,
    order: Vec<usize>,
}

impl RegressionTree {
    /// Greedy variance-reduction induction.
    ///
    /// Panics if `inputs` is empty or lengths differ.
    pub fn fit(inputs: &[[f64; 2]], targets: &[f64], config: &TreeConfig) -> Self {
        assert!(!inputs.is_empty(), "cannot fit a tree on no samples");
        assert_eq!(inputs.len(), targets.len());
        let mut tree = Self {
            nodes: Vec::new(),
            depth: 0,
        };
        let idx: Vec<usize> = (0..inputs.len()).collect();
        tree.grow(inputs, targets, idx, 0, config);
        tree
    }

    fn grow(
        &mut self,
        x: &[[f64; 2]],
        y: &[f64],
        idx: Vec<usize>,
        depth: usize,
        cfg: &TreeConfig,
    ) -> usize {
        let id = self.nodes.len();
        let mean = idx.iter().map(|&i| y[i]).sum::<f64>() / idx.len() as f64;
        self.nodes.push(Node::Leaf { value: mean });
        self.depth = self.depth.max(depth);
        if depth >= cfg.max_depth || idx.len() < 2 * cfg.min_leaf.max(1) {
            return id;
        }
        let first = y[idx[0]];
        if idx.iter().all(|&i| y[i] == first) {
            return id;
        }
        let Some(best) = best_split(x, y, &idx, mean, cfg.min_leaf.max(1)) else {
            return id;
        };
        let (l, r) = best.order.split_at(best.split_at);
        let (l, r) = (l.to_vec(), r.to_vec());
        let left = self.grow(x, y, l, depth + 1, cfg);
        let right = self.grow(x, y, r, depth + 1, cfg);
        self.nodes[id] = Node::Split {
            feature: best.feature,
            threshold: best.threshold,
            left,
            right,
        };
        id
    }

    pub fn predict(&self, x: [f64; 2]) -> f64 {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf { value } => return value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if x[feature] <= threshold { left } else { right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf { .. }))
            .count()
    }

    /// Root split as `(feature, threshold)`, if the root is not a leaf.
    pub fn root_split(&self) -> Option<(usize, f64)> {
        match self.nodes[0] {
            Node::Split {
                feature, threshold, ..
            } => Some((feature, threshold)),
            Node::Leaf { .. } => None,
        }
    }
}

fn best_split(
    x: &[[f64; 2]],
    y: &[f64],
    idx: &[usize],
    mean: f64,
    min_leaf: usize,
) -> Option<Candidate> {
    let n = idx.len();
    let mut best: Option<Candidate> = None;
    for feature in 0..2 {
        let mut order = idx.to_vec();
        order.sort_by(|&a, &b| x[a][feature].total_cmp(&x[b][feature]));
        // centred targets keep the prefix sums well conditioned
        let total: f64 = order.iter().map(|&i| y[i] - mean).sum();
        let mut left_sum = 0.0;
        let mut chosen: Option<(usize, f64)> = None;
        for k in 0..n - 1 {
            left_sum += y[order[k]] - mean;
            let n_left = k + 1;
            let n_right = n - n_left;
            if n_left < min_leaf || n_right < min_leaf {
                continue;
            }
            let (lo, hi) = (x[order[k]][feature], x[order[k + 1]][feature]);
            if lo >= hi {
                continue;
            }
            let right_sum = total - left_sum;
            let gain = left_sum * left_sum / n_left as f64 + right_sum * right_sum / n_right as f64
                - total * total / n as f64;
            if gain > chosen.map_or(0.0, |c| c.1) {
                chosen = Some((k, gain));
            }
        }
        if let Some((k, gain)) = chosen {
            if best.as_ref().is_none_or(|b| gain > b.gain) {
                let (lo, hi) = (x[order[k]][feature], x[order[k + 1]][feature]);
                let mid = lo + (hi - lo) / 2.0;
                let threshold = if mid < hi { mid } else { lo };
                best = Some(Candidate {
                    feature,
                    threshold,
                    gain,
                    split_at: k + 1,
                    order,
                });
            }
        }
    }
    best
}
