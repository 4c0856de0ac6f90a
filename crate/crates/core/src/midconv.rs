//! Middle convolution `MC_lambda` of a matrix tuple (Dettweiler-Reiter construction).

use crate::cyclo::CycloElt;
use crate::error::{Error, Result};
use crate::exactla::{nullspace, quotient_action, Mat, MatTuple, Subspace};

#[derive(Clone, Debug)]
pub struct ConvolutionData {
    pub blocks: Vec<Mat>,
    pub k: Subspace,
    pub l: Subspace,
    pub lambda: CycloElt,
}

fn unify_lambda(a: &MatTuple, lambda: &CycloElt) -> Result<(MatTuple, CycloElt)> {
    if lambda.is_zero() {
        return Err(Error::Invalid("lambda must be nonzero".into()));
    }
    let f = a.field().join(lambda.field());
    let lambda = lambda.embed(&f)?;
    if lambda.is_one() {
        return Err(Error::LambdaOne);
    }
    Ok((a.embed(&f)?, lambda))
}

/// `sum rank(A_i - I) - (n - rank(lambda A_1...A_T - I))`.
pub fn predicted_dim(a: &MatTuple, lambda: &CycloElt) -> Result<usize> {
    let (a, lambda) = unify_lambda(a, lambda)?;
    let n = a.dim();
    let ranks: usize = a.mats().iter().map(|m| m.minus_identity().rank()).sum();
    let r = a.product().scale(&lambda).minus_identity().rank();
    ranks
        .checked_sub(n - r)
        .ok_or_else(|| Error::Convolution("negative predicted dimension".into()))
}

/// The blocks `B_k` and the subspaces `K`, `L` of `F^{nT}`.
///
/// Block row `k` of `B_k` is `(lambda (A_1 - 1), ..., lambda (A_{k-1} - 1), lambda A_k, A_{k+1} - 1, ..., A_T - 1)`,
/// which makes `L` isomorphic to the kernel of `lambda A_1...A_T - 1`.
pub fn convolution_data(a: &MatTuple, lambda: &CycloElt) -> Result<ConvolutionData> {
    let (a, lambda) = unify_lambda(a, lambda)?;
    let f = a.field().clone();
    let n = a.dim();
    let t = a.len();
    let big = n * t;
    let shifted: Vec<Mat> = a.mats().iter().map(|m| m.minus_identity()).collect();

    let mut blocks = Vec::with_capacity(t);
    // Rows of B_k - I restricted to block row k, stacked over k, cut out L.
    let mut l_rows: Vec<Vec<CycloElt>> = Vec::with_capacity(big);
    for k in 0..t {
        let mut b = Mat::identity(&f, big);
        for j in 0..t {
            let blk = if j < k {
                shifted[j].scale(&lambda)
            } else if j == k {
                a.mats()[k].scale(&lambda)
            } else {
                shifted[j].clone()
            };
            for r in 0..n {
                for c in 0..n {
                    b.set(k * n + r, j * n + c, blk.get(r, c).clone());
                }
            }
        }
        for r in 0..n {
            let mut row = b.row(k * n + r);
            row[k * n + r] = &row[k * n + r] - &f.one();
            l_rows.push(row);
        }
        blocks.push(b);
    }

    let mut kvecs = Vec::new();
    for (k, s) in shifted.iter().enumerate() {
        for v in nullspace(&s.rows(), n, &f) {
            let mut w = vec![f.zero(); big];
            w[k * n..(k + 1) * n].clone_from_slice(&v);
            kvecs.push(w);
        }
    }
    let ksp = Subspace::span(&f, big, kvecs);
    let lsp = Subspace::span(&f, big, nullspace(&l_rows, big, &f));

    for (k, b) in blocks.iter().enumerate() {
        for (name, sp) in [("K", &ksp), ("L", &lsp)] {
            if sp.basis().iter().any(|v| !sp.contains(&b.apply(v))) {
                return Err(Error::Convolution(format!("B_{} does not preserve {name}", k + 1)));
            }
        }
    }
    Ok(ConvolutionData { blocks, k: ksp, l: lsp, lambda })
}

/// `MC_lambda(A)` together with the construction data.
pub fn middle_convolution_full(a: &MatTuple, lambda: &CycloElt) -> Result<(MatTuple, ConvolutionData)> {
    let data = convolution_data(a, lambda)?;
    let kl = data.k.sum(&data.l);
    let mats = data.blocks.iter().map(|b| quotient_action(b, &kl)).collect::<Result<Vec<_>>>()?;
    let expected = predicted_dim(a, lambda)?;
    let got = data.blocks[0].dim() - kl.dim();
    if got != expected {
        return Err(Error::Convolution(format!("output dimension {got}, formula gives {expected}")));
    }
    if got == 0 {
        return Err(Error::Convolution("output is zero-dimensional".into()));
    }
    Ok((MatTuple::new(mats)?, data))
}

pub fn middle_convolution(a: &MatTuple, lambda: &CycloElt) -> Result<MatTuple> {
    Ok(middle_convolution_full(a, lambda)?.0)
}

pub fn inverse_tuple(a: &MatTuple) -> Result<MatTuple> {
    a.inverse_tuple()
}

/// Dimension of the unital algebra generated by the matrices.
pub fn generated_algebra_dim(mats: &[Mat]) -> usize {
    let Some(first) = mats.first() else { return 0 };
    let f = first.field().clone();
    let n = first.dim();
    let flat = |m: &Mat| m.entries().to_vec();
    let mut span = Subspace::zero(&f, n * n);
    let mut queue = vec![Mat::identity(&f, n)];
    while let Some(w) = queue.pop() {
        let v = flat(&w);
        if span.contains(&v) {
            continue;
        }
        span = span.sum(&Subspace::span(&f, n * n, vec![v]));
        for g in mats {
            queue.push(w.matmul(g));
        }
    }
    span.dim()
}

/// Absolute irreducibility via Burnside: the generated algebra is all of `M_n`.
pub fn is_irreducible(mats: &[Mat]) -> bool {
    mats.first().is_some_and(|m| generated_algebra_dim(mats) == m.dim() * m.dim())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cyclo::make_field;

    #[test]
    fn identity_tuple_predicts_zero() {
        let f = make_field(3);
        let id = Mat::identity(&f, 2);
        let a = MatTuple::new(vec![id.clone(), id.clone(), id]).unwrap();
        assert_eq!(predicted_dim(&a, &f.zeta(1)).unwrap(), 0);
        assert!(matches!(predicted_dim(&a, &f.one()), Err(Error::LambdaOne)));
    }

    #[test]
    fn algebra_of_diagonal_is_small() {
        let f = make_field(1);
        let d = Mat::diag(&[f.from_int(1), f.from_int(2)]);
        assert_eq!(generated_algebra_dim(&[d.clone()]), 2);
        let u = Mat::from_int_rows(&f, &[vec![1, 1], vec![0, 1]]);
        let l = Mat::from_int_rows(&f, &[vec![1, 0], vec![1, 1]]);
        assert!(is_irreducible(&[u, l]));
    }
}
