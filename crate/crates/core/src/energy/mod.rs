//! Operation counting and energy estimation for spiking versus dense
//! networks. Spiking layers cost accumulate-only operations scaled by the
//! measured firing rate and repeated over the internal time steps; the
//! threshold-free output layer and every dense layer cost full
//! multiply-accumulates.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum EnergyError {
    #[error("got {rates} firing rates for {layers} spiking layers")]
    RateCount { layers: usize, rates: usize },
    #[error("network needs at least one weight layer")]
    NoLayers,
}

/// Per-operation energy cost in picojoules.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyCoefficients {
    /// Accumulate.
    pub e_ac_pj: f64,
    /// Multiply-accumulate.
    pub e_mac_pj: f64,
}

impl Default for EnergyCoefficients {
    fn default() -> Self {
        EnergyCoefficients {
            e_ac_pj: 0.1,
            e_mac_pj: 3.2,
        }
    }
}

/// Shapes of the weight layers as (fan_in, fan_out) products.
fn layer_products(layer_dims: &[usize]) -> Vec<f64> {
    layer_dims
        .windows(2)
        .map(|w| (w[0] * w[1]) as f64)
        .collect()
}

/// Event-driven operation count for one spiking forward pass at one time
/// step: the spiking layers' synaptic products scaled by their measured
/// firing rates. The final (threshold-free) layer is excluded; it is costed
/// as multiply-accumulates in [`energy_spiking`].
pub fn flops_spiking(layer_dims: &[usize], firing_rates: &[f64]) -> Result<f64, EnergyError> {
    let products = layer_products(layer_dims);
    if products.is_empty() {
        return Err(EnergyError::NoLayers);
    }
    let spiking = products.len() - 1;
    if firing_rates.len() != spiking {
        return Err(EnergyError::RateCount {
            layers: spiking,
            rates: firing_rates.len(),
        });
    }
    Ok(products[..spiking]
        .iter()
        .zip(firing_rates)
        .map(|(p, r)| p * r)
        .sum())
}

/// Dense-equivalent operation count: every synaptic product once.
pub fn flops_baseline(layer_dims: &[usize]) -> Result<f64, EnergyError> {
    let products = layer_products(layer_dims);
    if products.is_empty() {
        return Err(EnergyError::NoLayers);
    }
    Ok(products.iter().sum())
}

/// Energy of one spiking forward pass (pJ): accumulate cost for the
/// event-driven part repeated over `steps`, plus one multiply-accumulate
/// pass through the output layer.
pub fn energy_spiking(
    coeffs: &EnergyCoefficients,
    flops_spiking: f64,
    steps: usize,
    output_products: f64,
) -> f64 {
    coeffs.e_ac_pj * flops_spiking * steps as f64 + coeffs.e_mac_pj * output_products
}

/// Energy of one dense forward pass (pJ).
pub fn energy_baseline(coeffs: &EnergyCoefficients, layer_dims: &[usize]) -> Result<f64, EnergyError> {
    Ok(coeffs.e_mac_pj * flops_baseline(layer_dims)?)
}

/// Which part of an experiment an energy event belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    Training,
    Inference,
}

impl Phase {
    pub fn label(&self) -> &'static str {
        match self {
            Phase::Training => "training",
            Phase::Inference => "inference",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NetworkKind {
    Spiking,
    Dense,
}

impl NetworkKind {
    pub fn label(&self) -> &'static str {
        match self {
            NetworkKind::Spiking => "spiking",
            NetworkKind::Dense => "dense",
        }
    }
}

/// A batch of identical passes through one network.
#[derive(Debug, Clone)]
pub struct PassEvent {
    pub phase: Phase,
    pub kind: NetworkKind,
    pub layer_dims: Vec<usize>,
    /// Internal time steps (spiking only; ignored for dense).
    pub steps: usize,
    /// Measured firing rates per spiking layer (spiking only).
    pub firing_rates: Vec<f64>,
    /// Number of forward passes in the event.
    pub forward_passes: f64,
    /// Whether a backward pass accompanied each forward; costed at twice
    /// the forward operation count.
    pub with_backward: bool,
}

/// Accumulated totals for one (phase, network) pair.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PhaseTotals {
    pub forward_passes: f64,
    pub flops_ac: f64,
    pub flops_mac: f64,
    pub energy_pj: f64,
    /// What the same passes would cost on the dense baseline.
    pub baseline_equiv_pj: f64,
}

/// Additive energy bookkeeping across an experiment. Owned by a single
/// training or evaluation loop; all counting helpers above stay pure.
#[derive(Debug, Clone, Default)]
pub struct EnergyLedger {
    pub coeffs: EnergyCoefficients,
    totals: std::collections::BTreeMap<(&'static str, &'static str), PhaseTotals>,
}

impl EnergyLedger {
    pub fn new(coeffs: EnergyCoefficients) -> Self {
        EnergyLedger {
            coeffs,
            totals: Default::default(),
        }
    }

    pub fn accumulate(&mut self, event: &PassEvent) -> Result<(), EnergyError> {
        let multiplier = if event.with_backward { 3.0 } else { 1.0 }; // fwd + 2x bwd
        let passes = event.forward_passes;
        let products = layer_products(&event.layer_dims);
        if products.is_empty() {
            return Err(EnergyError::NoLayers);
        }
        let output_products = *products.last().unwrap();
        let baseline_flops = flops_baseline(&event.layer_dims)?;
        let baseline_pj = self.coeffs.e_mac_pj * baseline_flops;

        let (flops_ac, flops_mac, energy) = match event.kind {
            NetworkKind::Spiking => {
                let ac_per_step = flops_spiking(&event.layer_dims, &event.firing_rates)?;
                let ac = ac_per_step * event.steps as f64;
                let pj = energy_spiking(&self.coeffs, ac_per_step, event.steps, output_products);
                (ac, output_products, pj)
            }
            NetworkKind::Dense => (0.0, baseline_flops, baseline_pj),
        };

        let entry = self
            .totals
            .entry((event.phase.label(), event.kind.label()))
            .or_default();
        entry.forward_passes += passes;
        entry.flops_ac += flops_ac * passes * multiplier;
        entry.flops_mac += flops_mac * passes * multiplier;
        entry.energy_pj += energy * passes * multiplier;
        entry.baseline_equiv_pj += baseline_pj * passes * multiplier;
        Ok(())
    }

    pub fn totals(&self, phase: Phase, kind: NetworkKind) -> PhaseTotals {
        self.totals
            .get(&(phase.label(), kind.label()))
            .copied()
            .unwrap_or_default()
    }

    /// Total energy of one phase across network kinds (pJ).
    pub fn phase_energy(&self, phase: Phase) -> f64 {
        self.totals
            .iter()
            .filter(|((p, _), _)| *p == phase.label())
            .map(|(_, t)| t.energy_pj)
            .sum()
    }

    /// Dense-equivalent energy of one phase (pJ).
    pub fn phase_baseline_equiv(&self, phase: Phase) -> f64 {
        self.totals
            .iter()
            .filter(|((p, _), _)| *p == phase.label())
            .map(|(_, t)| t.baseline_equiv_pj)
            .sum()
    }

    /// Rows in a stable order for report emission.
    pub fn rows(&self) -> Vec<(&'static str, &'static str, PhaseTotals)> {
        self.totals
            .iter()
            .map(|(&(p, k), &t)| (p, k, t))
            .collect()
    }

    /// Fold another ledger into this one.
    pub fn merge(&mut self, other: &EnergyLedger) {
        for (key, t) in &other.totals {
            let entry = self.totals.entry(*key).or_default();
            entry.forward_passes += t.forward_passes;
            entry.flops_ac += t.flops_ac;
            entry.flops_mac += t.flops_mac;
            entry.energy_pj += t.energy_pj;
            entry.baseline_equiv_pj += t.baseline_equiv_pj;
        }
    }
}
