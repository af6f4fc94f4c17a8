use rand::Rng;
use serde::{Deserialize, Serialize};

use super::gemm::{gemm, Mat};
use super::tensor::{conv2d_forward, dense_forward, Tensor};
use super::{NnError, Result};
use crate::ingest::ChannelStats;
use crate::CHANNELS;

pub const PARAM_TENSORS: usize = 10;

/// Parameter tensors in declaration order (the order used by checkpoints,
/// gradients and the optimizer).
pub const PARAM_NAMES: [&str; PARAM_TENSORS] = [
    "conv1.weight",
    "conv1.bias",
    "conv2.weight",
    "conv2.bias",
    "conv3.weight",
    "conv3.bias",
    "fc1.weight",
    "fc1.bias",
    "fc2.weight",
    "fc2.bias",
];

/// Layer sizes of the regressor.
///
/// Input is `1 × 3 × window`. The first convolution is 3×3 and collapses the
/// colour axis to height 1; the next two are 1×3. All are unpadded, so each
/// shortens the time axis by 2. The two dense layers map the flattened
/// features to `hidden` units and then to a scalar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Architecture {
    pub window: usize,
    pub conv_channels: [usize; 3],
    pub hidden: usize,
}

impl Default for Architecture {
    fn default() -> Self {
        Architecture {
            window: crate::WINDOW_FRAMES,
            conv_channels: [8, 16, 32],
            hidden: 64,
        }
    }
}

impl Architecture {
    pub fn validate(&self) -> Result<()> {
        if self.window < 7 {
            return Err(NnError::Shape(format!(
                "window {} too short for three width-3 convolutions",
                self.window
            )));
        }
        if self.conv_channels.contains(&0) || self.hidden == 0 {
            return Err(NnError::Shape("layer widths must be positive".into()));
        }
        Ok(())
    }

    /// Output widths of the three convolutions.
    pub fn conv_widths(&self) -> [usize; 3] {
        [self.window - 2, self.window - 4, self.window - 6]
    }

    pub fn flat_features(&self) -> usize {
        self.conv_channels[2] * self.conv_widths()[2]
    }

    pub fn kernel_shape(&self, layer: usize) -> [usize; 4] {
        let c = self.conv_channels;
        match layer {
            0 => [c[0], 1, CHANNELS, 3],
            1 => [c[1], c[0], 1, 3],
            2 => [c[2], c[1], 1, 3],
            _ => panic!("conv layer index {layer} out of range"),
        }
    }

    pub fn param_shapes(&self) -> [Vec<usize>; PARAM_TENSORS] {
        let k = |l| self.kernel_shape(l).to_vec();
        let c = self.conv_channels;
        [
            k(0),
            vec![c[0]],
            k(1),
            vec![c[1]],
            k(2),
            vec![c[2]],
            vec![self.hidden, self.flat_features()],
            vec![self.hidden],
            vec![1, self.hidden],
            vec![1],
        ]
    }

    pub fn param_count(&self) -> usize {
        self.param_shapes()
            .iter()
            .map(|s| s.iter().product::<usize>())
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Conv2d {
    /// `out × in × kh × kw`
    pub shape: [usize; 4],
    pub weight: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Conv2d {
    fn zeros(shape: [usize; 4]) -> Self {
        Conv2d {
            shape,
            weight: vec![0.0; shape.iter().product()],
            bias: vec![0.0; shape[0]],
        }
    }

    pub fn kernel(&self) -> Tensor {
        Tensor::new(self.shape.to_vec(), self.weight.clone()).expect("conv kernel shape")
    }

    /// Columns of the im2col matrix: `in × kh × kw`.
    fn patch_len(&self) -> usize {
        self.shape[1] * self.shape[2] * self.shape[3]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub inputs: usize,
    pub outputs: usize,
    /// `outputs × inputs`, row-major
    pub weight: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Dense {
    fn zeros(inputs: usize, outputs: usize) -> Self {
        Dense {
            inputs,
            outputs,
            weight: vec![0.0; inputs * outputs],
            bias: vec![0.0; outputs],
        }
    }

    pub fn weights(&self) -> Tensor {
        Tensor::new(vec![self.outputs, self.inputs], self.weight.clone()).expect("dense shape")
    }
}

/// Gradients of the total loss, one flat array per parameter tensor in
/// [`PARAM_NAMES`] order.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub tensors: Vec<Vec<f64>>,
}

impl Gradients {
    pub fn max_abs(&self) -> f64 {
        self.tensors
            .iter()
            .flatten()
            .fold(0.0f64, |m, g| m.max(g.abs()))
    }
}

/// Loss decomposition: `total = mse + l2_penalty`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossValue {
    pub mse: f64,
    pub l2_penalty: f64,
    pub total: f64,
}

/// Three convolutions, two dense layers, ReLU between every pair of layers
/// and a linear scalar output. Carries the channel statistics its inputs
/// must be standardized with.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub arch: Architecture,
    pub conv: [Conv2d; 3],
    pub fc: [Dense; 2],
    pub channel_stats: ChannelStats,
}

/// Intermediate values kept from a batched forward pass.
struct Trace {
    batch: usize,
    /// im2col matrices, `patch_len × (batch · width)`
    cols: [Vec<f64>; 3],
    /// post-ReLU conv outputs, laid out `[channel][sample][x]`
    acts: [Vec<f64>; 3],
    /// flattened conv3 features, `batch × flat`
    flat: Vec<f64>,
    /// post-ReLU hidden layer, `batch × hidden`
    hidden: Vec<f64>,
    out: Vec<f64>,
}

impl Network {
    pub fn zeros(arch: Architecture, channel_stats: ChannelStats) -> Result<Self> {
        arch.validate()?;
        Ok(Network {
            arch,
            conv: [0, 1, 2].map(|l| Conv2d::zeros(arch.kernel_shape(l))),
            fc: [
                Dense::zeros(arch.flat_features(), arch.hidden),
                Dense::zeros(arch.hidden, 1),
            ],
            channel_stats,
        })
    }

    /// Uniform fan-in initialisation, `U(-1/√fan_in, 1/√fan_in)` for weights
    /// and biases, except the output bias which starts at `output_offset`.
    pub fn init(
        arch: Architecture,
        channel_stats: ChannelStats,
        output_offset: f64,
        rng: &mut impl Rng,
    ) -> Result<Self> {
        let mut net = Network::zeros(arch, channel_stats)?;
        let mut fill = |w: &mut [f64], fan_in: usize| {
            let bound = 1.0 / (fan_in as f64).sqrt();
            for x in w.iter_mut() {
                *x = rng.random_range(-bound..bound);
            }
        };
        for conv in net.conv.iter_mut() {
            let fan_in = conv.patch_len();
            fill(&mut conv.weight, fan_in);
            fill(&mut conv.bias, fan_in);
        }
        for fc in net.fc.iter_mut() {
            let fan_in = fc.inputs;
            fill(&mut fc.weight, fan_in);
            fill(&mut fc.bias, fan_in);
        }
        net.fc[1].bias[0] = output_offset;
        Ok(net)
    }

    pub fn params(&self) -> [&[f64]; PARAM_TENSORS] {
        let [c1, c2, c3] = &self.conv;
        let [f1, f2] = &self.fc;
        [
            &c1.weight, &c1.bias, &c2.weight, &c2.bias, &c3.weight, &c3.bias, &f1.weight,
            &f1.bias, &f2.weight, &f2.bias,
        ]
    }

    pub fn params_mut(&mut self) -> [&mut [f64]; PARAM_TENSORS] {
        let [c1, c2, c3] = &mut self.conv;
        let [f1, f2] = &mut self.fc;
        [
            &mut c1.weight,
            &mut c1.bias,
            &mut c2.weight,
            &mut c2.bias,
            &mut c3.weight,
            &mut c3.bias,
            &mut f1.weight,
            &mut f1.bias,
            &mut f2.weight,
            &mut f2.bias,
        ]
    }

    /// Whether tensor `i` (declaration order) is a weight rather than a bias.
    pub fn is_weight(i: usize) -> bool {
        i.is_multiple_of(2)
    }

    /// Σ w² over weights; biases are not penalised.
    pub fn weight_sq_sum(&self) -> f64 {
        self.params()
            .iter()
            .enumerate()
            .filter(|(i, _)| Self::is_weight(*i))
            .map(|(_, p)| p.iter().map(|w| w * w).sum::<f64>())
            .sum()
    }

    fn input_len(&self) -> usize {
        CHANNELS * self.arch.window
    }

    fn check_windows(&self, windows: &[&[f64]]) -> Result<()> {
        if windows.is_empty() {
            return Err(NnError::EmptyBatch);
        }
        let want = self.input_len();
        if let Some(w) = windows.iter().find(|w| w.len() != want) {
            return Err(NnError::Shape(format!(
                "window has {} values, expected {want} (3×{})",
                w.len(),
                self.arch.window
            )));
        }
        Ok(())
    }

    /// Raw (unclamped) prediction for one standardized window.
    pub fn forward(&self, window: &[f64]) -> Result<f64> {
        Ok(self.forward_batch(&[window])?[0])
    }

    /// Inference-mode prediction, clamped to `[0, 100]`.
    pub fn predict_clamped(&self, window: &[f64]) -> Result<f64> {
        Ok(self.forward(window)?.clamp(0.0, 100.0))
    }

    pub fn forward_batch(&self, windows: &[&[f64]]) -> Result<Vec<f64>> {
        self.check_windows(windows)?;
        Ok(self.trace(windows).out)
    }

    /// Layer-by-layer forward pass through [`conv2d_forward`] and
    /// [`dense_forward`], one window at a time.
    pub fn forward_unbatched(&self, window: &[f64]) -> Result<f64> {
        self.check_windows(&[window])?;
        let relu = |t: Tensor| {
            let shape = t.shape().to_vec();
            Tensor::new(shape, t.into_data().into_iter().map(|x| x.max(0.0)).collect())
        };
        let mut x = Tensor::new(vec![1, CHANNELS, self.arch.window], window.to_vec())?;
        for conv in &self.conv {
            x = relu(conv2d_forward(&x, &conv.kernel(), &conv.bias)?)?;
        }
        let flat = x.into_data();
        let h: Vec<f64> = dense_forward(&flat, &self.fc[0].weights(), &self.fc[0].bias)?
            .into_iter()
            .map(|v| v.max(0.0))
            .collect();
        Ok(dense_forward(&h, &self.fc[1].weights(), &self.fc[1].bias)?[0])
    }

    fn trace(&self, windows: &[&[f64]]) -> Trace {
        let bsz = windows.len();
        let arch = self.arch;
        let widths = arch.conv_widths();
        let w0 = arch.window;

        // conv1 patches: rows (colour, dx), columns (sample, x)
        let n1 = bsz * widths[0];
        let mut col1 = vec![0.0; CHANNELS * 3 * n1];
        for (b, win) in windows.iter().enumerate() {
            for r in 0..CHANNELS {
                for k in 0..3 {
                    let dst = &mut col1[(r * 3 + k) * n1 + b * widths[0]..][..widths[0]];
                    dst.copy_from_slice(&win[r * w0 + k..][..widths[0]]);
                }
            }
        }
        let act1 = conv_gemm(&self.conv[0], &col1, n1, bsz, widths[0]);
        let col2 = im2col(&act1, self.conv[1].shape[1], bsz, widths[0], widths[1]);
        let act2 = conv_gemm(&self.conv[1], &col2, bsz * widths[1], bsz, widths[1]);
        let col3 = im2col(&act2, self.conv[2].shape[1], bsz, widths[1], widths[2]);
        let act3 = conv_gemm(&self.conv[2], &col3, bsz * widths[2], bsz, widths[2]);

        // flatten to [sample][channel][x]
        let (c3, w3) = (arch.conv_channels[2], widths[2]);
        let d = arch.flat_features();
        let mut flat = vec![0.0; bsz * d];
        for o in 0..c3 {
            for b in 0..bsz {
                flat[b * d + o * w3..][..w3].copy_from_slice(&act3[(o * bsz + b) * w3..][..w3]);
            }
        }

        let fc1 = &self.fc[0];
        let h = fc1.outputs;
        let mut hidden = vec![0.0; bsz * h];
        for row in hidden.chunks_exact_mut(h) {
            row.copy_from_slice(&fc1.bias);
        }
        gemm(
            1.0,
            Mat::row_major(&flat, bsz, d),
            Mat::transposed(&fc1.weight, h, d),
            1.0,
            &mut hidden,
        );
        hidden.iter_mut().for_each(|x| *x = x.max(0.0));

        let fc2 = &self.fc[1];
        let out = hidden
            .chunks_exact(h)
            .map(|row| fc2.bias[0] + row.iter().zip(&fc2.weight).map(|(a, w)| a * w).sum::<f64>())
            .collect();

        Trace {
            batch: bsz,
            cols: [col1, col2, col3],
            acts: [act1, act2, act3],
            flat,
            hidden,
            out,
        }
    }

    /// Loss on a batch and its exact gradient with respect to every parameter.
    ///
    /// The loss is the batch-mean squared error plus `l2 · Σ w²` over
    /// weights (biases excluded).
    pub fn backward(
        &self,
        windows: &[&[f64]],
        labels: &[f64],
        l2: f64,
    ) -> Result<(LossValue, Gradients)> {
        self.check_windows(windows)?;
        if labels.len() != windows.len() {
            return Err(NnError::Shape(format!(
                "{} windows but {} labels",
                windows.len(),
                labels.len()
            )));
        }
        let t = self.trace(windows);
        let lossv = loss(&t.out, labels, self, l2)?;
        let bsz = t.batch;
        let arch = self.arch;
        let widths = arch.conv_widths();
        let h = arch.hidden;
        let d = arch.flat_features();

        let dout: Vec<f64> = t
            .out
            .iter()
            .zip(labels)
            .map(|(p, y)| 2.0 * (p - y) / bsz as f64)
            .collect();

        // fc2
        let fc2 = &self.fc[1];
        let mut g_w5 = vec![0.0; h];
        let mut dhidden = vec![0.0; bsz * h];
        for (b, row) in t.hidden.chunks_exact(h).enumerate() {
            for j in 0..h {
                g_w5[j] += dout[b] * row[j];
                dhidden[b * h + j] = if row[j] > 0.0 {
                    dout[b] * fc2.weight[j]
                } else {
                    0.0
                };
            }
        }
        let g_b5 = vec![dout.iter().sum::<f64>()];

        // fc1
        let fc1 = &self.fc[0];
        let mut g_w4 = vec![0.0; h * d];
        gemm(
            1.0,
            Mat::transposed(&dhidden, bsz, h),
            Mat::row_major(&t.flat, bsz, d),
            0.0,
            &mut g_w4,
        );
        let mut g_b4 = vec![0.0; h];
        for row in dhidden.chunks_exact(h) {
            for (g, v) in g_b4.iter_mut().zip(row) {
                *g += v;
            }
        }
        let mut dflat = vec![0.0; bsz * d];
        gemm(
            1.0,
            Mat::row_major(&dhidden, bsz, h),
            Mat::row_major(&fc1.weight, h, d),
            0.0,
            &mut dflat,
        );

        // back to [channel][sample][x] through the conv3 ReLU
        let (c3, w3) = (arch.conv_channels[2], widths[2]);
        let mut dz = vec![0.0; c3 * bsz * w3];
        for o in 0..c3 {
            for b in 0..bsz {
                let src = &dflat[b * d + o * w3..][..w3];
                let idx = (o * bsz + b) * w3;
                for x in 0..w3 {
                    if t.acts[2][idx + x] > 0.0 {
                        dz[idx + x] = src[x];
                    }
                }
            }
        }

        let mut conv_grads: [(Vec<f64>, Vec<f64>); 3] = Default::default();
        for layer in (0..3).rev() {
            let conv = &self.conv[layer];
            let c_out = conv.shape[0];
            let k = conv.patch_len();
            let n = bsz * widths[layer];
            let col = &t.cols[layer];
            let mut g_w = vec![0.0; c_out * k];
            gemm(
                1.0,
                Mat::row_major(&dz, c_out, n),
                Mat::transposed(col, k, n),
                0.0,
                &mut g_w,
            );
            let g_b: Vec<f64> = dz.chunks_exact(n).map(|r| r.iter().sum()).collect();
            conv_grads[layer] = (g_w, g_b);
            if layer == 0 {
                break;
            }
            let mut dcol = vec![0.0; k * n];
            gemm(
                1.0,
                Mat::transposed(&conv.weight, c_out, k),
                Mat::row_major(&dz, c_out, n),
                0.0,
                &mut dcol,
            );
            let c_in = conv.shape[1];
            let (w_in, w_out) = (widths[layer - 1], widths[layer]);
            let act_in = &t.acts[layer - 1];
            let mut dprev = vec![0.0; c_in * bsz * w_in];
            for i in 0..c_in {
                for kk in 0..3 {
                    let src = &dcol[(i * 3 + kk) * n..][..n];
                    for b in 0..bsz {
                        let dst = &mut dprev[(i * bsz + b) * w_in + kk..][..w_out];
                        for (a, s) in dst.iter_mut().zip(&src[b * w_out..][..w_out]) {
                            *a += s;
                        }
                    }
                }
            }
            for (g, a) in dprev.iter_mut().zip(act_in) {
                if *a <= 0.0 {
                    *g = 0.0;
                }
            }
            dz = dprev;
        }

        let [(g_w1, g_b1), (g_w2, g_b2), (g_w3, g_b3)] = conv_grads;
        let mut tensors = vec![g_w1, g_b1, g_w2, g_b2, g_w3, g_b3, g_w4, g_b4, g_w5, g_b5];
        if l2 != 0.0 {
            for (i, (g, p)) in tensors.iter_mut().zip(self.params()).enumerate() {
                if Self::is_weight(i) {
                    for (gi, wi) in g.iter_mut().zip(p) {
                        *gi += 2.0 * l2 * wi;
                    }
                }
            }
        }
        Ok((lossv, Gradients { tensors }))
    }
}

/// im2col for a height-1 conv with kernel width 3 over `[channel][sample][x]`.
fn im2col(act: &[f64], c_in: usize, bsz: usize, w_in: usize, w_out: usize) -> Vec<f64> {
    let n = bsz * w_out;
    let mut col = vec![0.0; c_in * 3 * n];
    for i in 0..c_in {
        for k in 0..3 {
            let row = &mut col[(i * 3 + k) * n..][..n];
            for b in 0..bsz {
                row[b * w_out..][..w_out].copy_from_slice(&act[(i * bsz + b) * w_in + k..][..w_out]);
            }
        }
    }
    col
}

/// `relu(W · col + b)`, laid out `[channel][sample][x]`.
fn conv_gemm(conv: &Conv2d, col: &[f64], n: usize, _bsz: usize, _width: usize) -> Vec<f64> {
    let c_out = conv.shape[0];
    let k = conv.patch_len();
    let mut z = vec![0.0; c_out * n];
    for (row, b) in z.chunks_exact_mut(n).zip(&conv.bias) {
        row.fill(*b);
    }
    gemm(
        1.0,
        Mat::row_major(&conv.weight, c_out, k),
        Mat::row_major(col, k, n),
        1.0,
        &mut z,
    );
    z.iter_mut().for_each(|x| *x = x.max(0.0));
    z
}

/// Mean squared error plus `l2 · Σ w²` over the network's weights.
pub fn loss(predictions: &[f64], labels: &[f64], net: &Network, l2: f64) -> Result<LossValue> {
    if predictions.is_empty() {
        return Err(NnError::EmptyBatch);
    }
    if predictions.len() != labels.len() {
        return Err(NnError::Shape(format!(
            "{} predictions but {} labels",
            predictions.len(),
            labels.len()
        )));
    }
    let mse = predictions
        .iter()
        .zip(labels)
        .map(|(p, y)| (p - y).powi(2))
        .sum::<f64>()
        / predictions.len() as f64;
    let l2_penalty = l2 * net.weight_sq_sum();
    Ok(LossValue {
        mse,
        l2_penalty,
        total: mse + l2_penalty,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn small_arch() -> Architecture {
        Architecture {
            window: 10,
            conv_channels: [2, 3, 2],
            hidden: 4,
        }
    }

    fn random_net(arch: Architecture, seed: u64) -> Network {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Network::init(arch, ChannelStats::IDENTITY, 0.3, &mut rng).unwrap()
    }

    fn random_window(len: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
        (0..len).map(|_| rng.random_range(-2.0..2.0)).collect()
    }

    #[test]
    fn default_shapes_chain() {
        let arch = Architecture::default();
        assert_eq!(arch.conv_widths(), [88, 86, 84]);
        assert_eq!(arch.flat_features(), 32 * 84);
        let net = Network::zeros(arch, ChannelStats::IDENTITY).unwrap();
        assert_eq!(net.conv[0].shape, [8, 1, 3, 3]);
        for (p, s) in net.params().iter().zip(arch.param_shapes()) {
            assert_eq!(p.len(), s.iter().product::<usize>());
        }
    }

    #[test]
    fn zero_network_predicts_zero() {
        let net = Network::zeros(Architecture::default(), ChannelStats::IDENTITY).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let w = random_window(270, &mut rng);
        assert_eq!(net.forward(&w).unwrap(), 0.0);
    }

    #[test]
    fn batched_matches_layer_by_layer() {
        let arch = Architecture::default();
        let net = random_net(arch, 5);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let windows: Vec<Vec<f64>> = (0..5).map(|_| random_window(270, &mut rng)).collect();
        let refs: Vec<&[f64]> = windows.iter().map(|w| w.as_slice()).collect();
        let batched = net.forward_batch(&refs).unwrap();
        for (w, b) in windows.iter().zip(batched) {
            let single = net.forward_unbatched(w).unwrap();
            assert!((single - b).abs() < 1e-10, "{single} vs {b}");
        }
    }

    #[test]
    fn wrong_window_length() {
        let net = random_net(Architecture::default(), 1);
        assert!(net.forward(&[0.0; 269]).is_err());
        assert!(matches!(net.forward_batch(&[]), Err(NnError::EmptyBatch)));
    }

    #[test]
    fn loss_examples() {
        let net = Network::zeros(small_arch(), ChannelStats::IDENTITY).unwrap();
        let l = loss(&[90.0, 80.0], &[92.0, 78.0], &net, 0.1).unwrap();
        assert_eq!(l.mse, 4.0);
        assert_eq!(l.total, l.mse);
        assert_eq!(loss(&[1.0, 2.0], &[1.0, 2.0], &net, 0.1).unwrap().mse, 0.0);
        assert!(loss(&[], &[], &net, 0.1).is_err());

        let net = random_net(small_arch(), 2);
        let l = loss(&[1.0], &[0.0], &net, 0.1).unwrap();
        assert!((l.l2_penalty - 0.1 * net.weight_sq_sum()).abs() < 1e-15);
        assert_eq!(l.total, l.mse + l.l2_penalty);
    }

    #[test]
    fn duplicated_sample_has_single_sample_gradient() {
        let net = random_net(small_arch(), 3);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let w = random_window(30, &mut rng);
        let (_, g1) = net.backward(&[&w], &[1.5], 0.1).unwrap();
        let (_, g2) = net.backward(&[&w, &w], &[1.5, 1.5], 0.1).unwrap();
        for (a, b) in g1.tensors.iter().flatten().zip(g2.tensors.iter().flatten()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_loss_gives_zero_output_bias_gradient() {
        let net = Network::zeros(small_arch(), ChannelStats::IDENTITY).unwrap();
        let w = vec![0.7; 30];
        let (l, g) = net.backward(&[&w], &[0.0], 0.1).unwrap();
        assert_eq!(l.total, 0.0);
        assert_eq!(g.tensors[9], vec![0.0]);
    }

    #[test]
    fn init_is_seeded() {
        assert_eq!(random_net(small_arch(), 9), random_net(small_arch(), 9));
        assert_ne!(random_net(small_arch(), 9), random_net(small_arch(), 10));
        assert_eq!(random_net(small_arch(), 9).fc[1].bias[0], 0.3);
    }
}
