use super::TransportParams;
use crate::error::ParamError;

/// Width of the smoothing window above the threshold, relative to it.
const RAMP: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActivationMode {
    /// Each steel-surface point activates when its own chloride content
    /// reaches the threshold.
    Local,
    /// The whole steel surface activates at full current density as soon
    /// as any point reaches the threshold.
    Uniform,
}

/// Corrosion state of the steel-interface nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivationState {
    /// Mesh node ids of the steel interface.
    pub nodes: Vec<usize>,
    /// Running maximum of the total chloride content (%).
    pub running_max: Vec<f64>,
    pub fully_active: Vec<bool>,
    /// Anodic current density (A/m2).
    pub current: Vec<f64>,
    /// Time at which the current first became positive.
    pub activation_time: Vec<Option<f64>>,
}

impl ActivationState {
    pub fn new(nodes: Vec<usize>) -> Self {
        let n = nodes.len();
        ActivationState {
            nodes,
            running_max: vec![0.0; n],
            fully_active: vec![false; n],
            current: vec![0.0; n],
            activation_time: vec![None; n],
        }
    }

    pub fn any_active(&self) -> bool {
        self.current.iter().any(|&i| i > 0.0)
    }

    pub fn active_fraction(&self) -> f64 {
        if self.nodes.is_empty() {
            return 0.0;
        }
        self.current.iter().filter(|&&i| i > 0.0).count() as f64 / self.nodes.len() as f64
    }

    /// Update from the total chloride content (%) at the interface nodes, in
    /// the order of `nodes`.
    pub fn update(&mut self, c_tot: &[f64], time: f64, mode: ActivationMode, p: &TransportParams) -> Result<(), ParamError> {
        let t = p.threshold_pct;
        if !(t > 0.0) {
            return Err(ParamError::new(format!("chloride threshold must be positive, got {t}")));
        }
        for (m, &c) in self.running_max.iter_mut().zip(c_tot) {
            *m = m.max(c);
        }
        match mode {
            ActivationMode::Local => {
                for k in 0..self.nodes.len() {
                    let x = ((self.running_max[k] - t) / (RAMP * t)).clamp(0.0, 1.0);
                    let i_a = p.current_density * x * x * (3.0 - 2.0 * x);
                    // the latch keeps the largest current reached so far
                    self.current[k] = self.current[k].max(i_a);
                    if x >= 1.0 {
                        self.fully_active[k] = true;
                    }
                }
            }
            ActivationMode::Uniform => {
                if self.running_max.iter().any(|&m| m >= t) {
                    self.current.iter_mut().for_each(|i| *i = p.current_density);
                    self.fully_active.iter_mut().for_each(|a| *a = true);
                }
            }
        }
        for (k, &i) in self.current.iter().enumerate() {
            if i > 0.0 && self.activation_time[k].is_none() {
                self.activation_time[k] = Some(time);
            }
        }
        Ok(())
    }
}
