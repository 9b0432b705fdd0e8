//! Forward/backward math for the mean-of-embeddings softmax classifier.
//!
//! Everything here is generic over the float type: the model runs in f32,
//! the finite-difference gradient test runs the identical code in f64.

use num_traits::Float;

use super::matrix::Matrix;

/// Mean of the input-embedding rows addressed by `features` (the hidden vector).
pub fn hidden<T: Float>(input: &Matrix<T>, features: &[u32]) -> Vec<T> {
    let mut h = vec![T::zero(); input.cols()];
    if features.is_empty() {
        return h;
    }
    for &f in features {
        for (slot, &x) in h.iter_mut().zip(input.row(f as usize)) {
            *slot = *slot + x;
        }
    }
    let inv = T::one() / T::from(features.len()).unwrap();
    for slot in &mut h {
        *slot = *slot * inv;
    }
    h
}

/// Raw label scores: `output · hidden`.
pub fn scores<T: Float>(output: &Matrix<T>, hidden: &[T]) -> Vec<T> {
    (0..output.rows()).map(|l| output.dot_row(l, hidden)).collect()
}

/// In-place softmax, shifted by the max score for stability.
pub fn softmax<T: Float>(scores: &mut [T]) {
    let max = scores.iter().cloned().fold(T::neg_infinity(), T::max);
    let mut sum = T::zero();
    for s in scores.iter_mut() {
        *s = (*s - max).exp();
        sum = sum + *s;
    }
    for s in scores.iter_mut() {
        *s = *s / sum;
    }
}

/// Negative log-likelihood of `target` for one example.
pub fn example_loss<T: Float>(input: &Matrix<T>, output: &Matrix<T>, features: &[u32], target: usize) -> T {
    let h = hidden(input, features);
    let mut p = scores(output, &h);
    softmax(&mut p);
    -p[target].ln()
}

/// Analytic gradients of [`example_loss`] w.r.t. every entry of both matrices.
///
/// Dense result matrices; meant for small gradient-check models, not training.
pub fn example_gradients<T: Float>(
    input: &Matrix<T>,
    output: &Matrix<T>,
    features: &[u32],
    target: usize,
) -> (Matrix<T>, Matrix<T>) {
    let h = hidden(input, features);
    let mut p = scores(output, &h);
    softmax(&mut p);

    // d loss / d output[l] = (p_l - 1{l = target}) * hidden
    let mut d_output = Matrix::zeros(output.rows(), output.cols());
    for l in 0..output.rows() {
        let coeff = if l == target { p[l] - T::one() } else { p[l] };
        d_output.add_to_row(l, &h, coeff);
    }

    // d loss / d hidden = output^T (p - y); each feature row receives
    // d_hidden / n once per occurrence in `features`.
    let mut d_hidden = vec![T::zero(); input.cols()];
    for l in 0..output.rows() {
        let coeff = if l == target { p[l] - T::one() } else { p[l] };
        for (slot, &w) in d_hidden.iter_mut().zip(output.row(l)) {
            *slot = *slot + coeff * w;
        }
    }
    let inv_n = T::one() / T::from(features.len()).unwrap();
    let mut d_input = Matrix::zeros(input.rows(), input.cols());
    for &f in features {
        d_input.add_to_row(f as usize, &d_hidden, inv_n);
    }
    (d_input, d_output)
}

/// One SGD step on a single example; returns its loss.
///
/// Matches [`example_gradients`]: output rows are read before they are
/// updated, and every feature row moves by `lr/n` times the hidden gradient.
pub fn sgd_step<T: Float>(
    input: &mut Matrix<T>,
    output: &mut Matrix<T>,
    features: &[u32],
    target: usize,
    lr: T,
) -> T {
    let h = hidden(input, features);
    let mut p = scores(output, &h);
    softmax(&mut p);
    let loss = -p[target].ln();

    let mut d_hidden = vec![T::zero(); input.cols()];
    for l in 0..output.rows() {
        let alpha = lr * (if l == target { T::one() - p[l] } else { -p[l] });
        for (slot, &w) in d_hidden.iter_mut().zip(output.row(l)) {
            *slot = *slot + alpha * w;
        }
        output.add_to_row(l, &h, alpha);
    }
    let inv_n = T::one() / T::from(features.len()).unwrap();
    for &f in features {
        input.add_to_row(f as usize, &d_hidden, inv_n);
    }
    loss
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> (Matrix<f64>, Matrix<f64>) {
        let input = Matrix::from_vec(4, 3, (0..12).map(|i| (i as f64 * 0.17).sin() * 0.3).collect());
        let output = Matrix::from_vec(2, 3, (0..6).map(|i| (i as f64 * 0.31).cos() * 0.2).collect());
        (input, output)
    }

    #[test]
    fn hidden_is_mean_of_rows() {
        let (input, _) = toy();
        let h = hidden(&input, &[0, 2]);
        for c in 0..3 {
            let expect = (input.row(0)[c] + input.row(2)[c]) / 2.0;
            assert!((h[c] - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn repeated_feature_counts_twice_in_mean() {
        let (input, _) = toy();
        let h = hidden(&input, &[1, 1, 3]);
        for c in 0..3 {
            let expect = (2.0 * input.row(1)[c] + input.row(3)[c]) / 3.0;
            assert!((h[c] - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn softmax_normalizes() {
        let mut s = vec![1.0f64, -2.0, 0.5, 3.0];
        softmax(&mut s);
        let sum: f64 = s.iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
        assert!(s.iter().all(|&p| p > 0.0));
    }

    #[test]
    fn softmax_handles_large_scores() {
        let mut s = vec![1000.0f64, 999.0];
        softmax(&mut s);
        assert!(s[0] > s[1]);
        assert!((s.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sgd_step_reduces_loss_on_repeat() {
        let (mut input, mut output) = toy();
        let feats = [0u32, 1, 1];
        let before = example_loss(&input, &output, &feats, 1);
        sgd_step(&mut input, &mut output, &feats, 1, 0.5);
        let after = example_loss(&input, &output, &feats, 1);
        assert!(after < before);
    }

    #[test]
    fn sgd_step_matches_analytic_gradient_direction() {
        let (input, output) = toy();
        let feats = [2u32, 3];
        let lr = 0.1;
        let (d_in, d_out) = example_gradients(&input, &output, &feats, 0);
        let (mut input2, mut output2) = (input.clone(), output.clone());
        sgd_step(&mut input2, &mut output2, &feats, 0, lr);
        for i in 0..input.data().len() {
            let expect = input.data()[i] - lr * d_in.data()[i];
            assert!((input2.data()[i] - expect).abs() < 1e-12);
        }
        for i in 0..output.data().len() {
            let expect = output.data()[i] - lr * d_out.data()[i];
            assert!((output2.data()[i] - expect).abs() < 1e-12);
        }
    }
}
