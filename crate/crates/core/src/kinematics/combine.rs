//! Right-hand sides built from component measure vectors, with first-order
//! (delta method) standard errors.

use crate::measures::{ConeVectorEstimate, MCEstimate};

/// A measure vector of one cone with the covariance of its estimate.
#[derive(Clone, Debug, PartialEq)]
pub struct Component {
    pub mean: Vec<f64>,
    pub cov: Vec<Vec<f64>>,
}

impl Component {
    pub fn exact(mean: Vec<f64>) -> Component {
        let n = mean.len();
        Component { mean, cov: vec![vec![0.0; n]; n] }
    }

    /// Disjoint indicators of one stream: multinomial covariance.
    pub fn from_shared_stream(est: &ConeVectorEstimate) -> Component {
        let p = est.means();
        let n = est.n as f64;
        let cov = (0..p.len())
            .map(|a| (0..p.len()).map(|b| (if a == b { p[a] } else { 0.0 } - p[a] * p[b]) / n).collect())
            .collect();
        Component { mean: p, cov }
    }

    /// Independently estimated entries.
    pub fn from_independent(est: &[MCEstimate]) -> Component {
        let n = est.len();
        let mut cov = vec![vec![0.0; n]; n];
        for (i, e) in est.iter().enumerate() {
            cov[i][i] = e.stderr * e.stderr;
        }
        Component { mean: est.iter().map(|e| e.mean).collect(), cov }
    }

    pub fn len(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean.is_empty()
    }
}

fn tuples(lens: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for &l in lens {
        out = out.into_iter().flat_map(|t| (0..l).map(move |k| [t.clone(), vec![k]].concat())).collect();
    }
    out
}

/// `Σ_{tuples with keep(tuple)} Π_i c_i[k_i]` and its standard error, the
/// components being independent of each other.
pub fn tuple_sum(components: &[Component], keep: impl Fn(&[usize]) -> bool) -> (f64, f64) {
    let lens: Vec<usize> = components.iter().map(Component::len).collect();
    let mut value = 0.0;
    let mut grads: Vec<Vec<f64>> = lens.iter().map(|&l| vec![0.0; l]).collect();
    for t in tuples(&lens).into_iter().filter(|t| keep(t)) {
        let terms: Vec<f64> = t.iter().zip(components).map(|(&k, c)| c.mean[k]).collect();
        value += terms.iter().product::<f64>();
        for j in 0..t.len() {
            let others: f64 = terms.iter().enumerate().filter(|(i, _)| *i != j).map(|(_, v)| v).product();
            grads[j][t[j]] += others;
        }
    }
    let var: f64 = components
        .iter()
        .zip(&grads)
        .map(|(c, g)| (0..g.len()).map(|a| (0..g.len()).map(|b| g[a] * c.cov[a][b] * g[b]).sum::<f64>()).sum::<f64>())
        .sum();
    (value, var.max(0.0).sqrt())
}

/// Entry `m` of the convolution of the components (the rule for products).
pub fn convolution_entry(components: &[Component], m: usize) -> (f64, f64) {
    tuple_sum(components, |t| t.iter().sum::<usize>() == m)
}
