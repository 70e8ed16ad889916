use super::{OperatorSet, Tensor};
use crate::error::Result;
use crate::flow::{FlowField, Warp};
use crate::frame::{Channel, PACKED_CHANNELS};

/// Channels of every state: the six packed channels plus a confidence.
const STATE: usize = PACKED_CHANNELS + 1;

/// Motion-compensated fusion. States carry the six packed channels and a
/// per-sample confidence; refinement averages a state with an aligned
/// incoming state, weighted by confidence. Incoming samples whose mean
/// absolute difference from a trusted state reaches `residual_scale` are
/// treated as misaligned and ignored. Aligning a state scales its confidence down by
/// the matching residual of the flow and zeroes it where the warp reads
/// from outside the source.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McFuse {
    pub residual_scale: f32,
}

impl Default for McFuse {
    fn default() -> Self {
        Self { residual_scale: 16.0 }
    }
}

impl McFuse {
    /// Fuses two seven-channel states sample by sample.
    pub fn blend(&self, own: &[Channel], incoming: &[Channel]) -> Vec<Channel> {
        let (w, h) = (own[0].width, own[0].height);
        let mut out: Vec<Channel> = own.to_vec();
        for i in 0..w * h {
            let c_own = own[PACKED_CHANNELS].data[i];
            let c_in = incoming[PACKED_CHANNELS].data[i];
            if c_in <= 0.0 {
                continue;
            }
            let mut diff = 0.0f32;
            for k in 0..PACKED_CHANNELS {
                diff += (incoming[k].data[i] - own[k].data[i]).abs();
            }
            let mismatch = (diff / PACKED_CHANNELS as f32 / self.residual_scale).min(1.0);
            // disagreement only counts against the incoming sample as far as
            // the own sample is trusted
            let c_eff = c_in * (1.0 - mismatch * c_own.min(1.0));
            let total = c_own + c_eff;
            if total <= 0.0 {
                continue;
            }
            let wgt = c_eff / total;
            for k in 0..PACKED_CHANNELS {
                let a = own[k].data[i];
                out[k].data[i] = a + wgt * (incoming[k].data[i] - a);
            }
            out[PACKED_CHANNELS].data[i] = total;
        }
        out
    }
}

impl OperatorSet for McFuse {
    fn state_channels(&self) -> usize {
        STATE
    }

    /// Appends a unit confidence to the packed channels and carries the
    /// aligned state along for the refinement that follows.
    fn extract(&self, input: &Tensor) -> Tensor {
        let (w, h) = (input.width, input.height);
        let mut channels = input.channels[..PACKED_CHANNELS].to_vec();
        channels.push(Channel::filled(w, h, 1.0));
        channels.extend_from_slice(&input.channels[PACKED_CHANNELS..]);
        Tensor {
            width: w,
            height: h,
            channels,
        }
    }

    fn refine_backward(&self, input: &Tensor) -> Tensor {
        if input.len() < 2 * STATE {
            return input.clone();
        }
        let n = input.len();
        Tensor {
            width: input.width,
            height: input.height,
            channels: self.blend(&input.channels[..STATE], &input.channels[n - STATE..]),
        }
    }

    /// Fuses the leading state with the trailing aligned state; anything in
    /// between (the packed frame) is already part of the leading state.
    fn refine_forward(&self, input: &Tensor) -> Tensor {
        self.refine_backward(input)
    }

    fn align(&self, state: &Tensor, flow: &FlowField) -> Result<Tensor> {
        let mut out = state.warp(flow)?;
        if out.len() == STATE {
            let luma = warp_luma_phases(&state.channels[..4], flow)?;
            out.channels.splice(..4, luma);
            let (w, h) = (out.width as f32, out.height as f32);
            let conf = &mut out.channels[PACKED_CHANNELS];
            for y in 0..out.height {
                for x in 0..out.width {
                    let i = y * out.width + x;
                    let (dx, dy) = flow.at(x, y);
                    let (sx, sy) = (x as f32 + dx, y as f32 + dy);
                    if sx < -0.5 || sy < -0.5 || sx > w - 0.5 || sy > h - 0.5 {
                        conf.data[i] = 0.0;
                    } else {
                        conf.data[i] *= 1.0 - (flow.residual[i] / self.residual_scale).min(1.0);
                    }
                }
            }
        }
        Ok(out)
    }

    fn reconstruct(&self, state: &Tensor) -> Tensor {
        Tensor {
            width: state.width,
            height: state.height,
            channels: state.channels[..PACKED_CHANNELS].to_vec(),
        }
    }
}

/// Warps the four luma phase channels as one full-resolution plane, so a
/// displacement of an odd number of luma samples stays on the sample grid
/// instead of interpolating between phases.
fn warp_luma_phases(phases: &[Channel], flow: &FlowField) -> Result<Vec<Channel>> {
    let (w2, h2) = (phases[0].width, phases[0].height);
    let (w, h) = (2 * w2, 2 * h2);
    let plane = Channel::from_fn(w, h, |x, y| phases[2 * (y % 2) + x % 2].get(x / 2, y / 2));
    let mut full = FlowField::zeros(w, h, flow.tag);
    for y in 0..h {
        for x in 0..w {
            let (dx, dy) = flow.at(x / 2, y / 2);
            full.dx[y * w + x] = 2.0 * dx;
            full.dy[y * w + x] = 2.0 * dy;
        }
    }
    let warped = plane.warp(&full)?;
    Ok((0..4)
        .map(|k| Channel::from_fn(w2, h2, |x, y| warped.get(2 * x + k % 2, 2 * y + k / 2)))
        .collect())
}
