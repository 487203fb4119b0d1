use super::{QError, QResult};

/// Index bookkeeping for acting on a subset of subsystems.
///
/// `offsets[a]` is the flat-index contribution of target multi-index `a`
/// (targets taken in the order given), and `bases` enumerates every flat
/// index whose target digits are all zero. Any flat index is then uniquely
/// `bases[k] + offsets[a]`.
pub(crate) struct Layout {
    pub offsets: Vec<usize>,
    pub bases: Vec<usize>,
}

pub(crate) fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

impl Layout {
    pub fn new(dims: &[usize], targets: &[usize]) -> QResult<Self> {
        let mut seen = vec![false; dims.len()];
        for &t in targets {
            if t >= dims.len() || seen[t] {
                return Err(QError::InvalidTargets(targets.to_vec()));
            }
            seen[t] = true;
        }
        if targets.is_empty() {
            return Err(QError::InvalidTargets(Vec::new()));
        }
        let st = strides(dims);

        let target_dims: Vec<usize> = targets.iter().map(|&t| dims[t]).collect();
        let m: usize = target_dims.iter().product();
        let mut offsets = Vec::with_capacity(m);
        for a in 0..m {
            let mut rem = a;
            let mut off = 0;
            for j in (0..targets.len()).rev() {
                let digit = rem % target_dims[j];
                rem /= target_dims[j];
                off += digit * st[targets[j]];
            }
            offsets.push(off);
        }

        let rest: Vec<usize> = (0..dims.len()).filter(|k| !seen[*k]).collect();
        let rest_dims: Vec<usize> = rest.iter().map(|&k| dims[k]).collect();
        let nb: usize = rest_dims.iter().product();
        let mut bases = Vec::with_capacity(nb);
        for b in 0..nb {
            let mut rem = b;
            let mut off = 0;
            for j in (0..rest.len()).rev() {
                let digit = rem % rest_dims[j];
                rem /= rest_dims[j];
                off += digit * st[rest[j]];
            }
            bases.push(off);
        }

        Ok(Layout { offsets, bases })
    }
}
