//! The full pipeline from a parsed circuit to a scheduled, scored program.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::architecture::{check_capacity, ArchError, ArchitectureConfig};
use crate::circuit::{Circuit, CircuitError, GateDag};
use crate::fidelity::{
    evaluate_fidelity, FidelityError, FidelityInputs, FidelityReport, PhysicalParams,
};
use crate::placement::{
    anneal, propose_sequence, validate_sequence, AnnealOutcome, CostBreakdown, PlacementError,
    PlacementSequence, SaParams,
};
use crate::router::{assemble_schedule, RouterParams, Schedule, ScheduleError};
use crate::scheduler::{asap_schedule, StagePlan};
use crate::timing::TimingModel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompileOptions {
    /// `None` sizes the array to the circuit.
    pub architecture: Option<ArchitectureConfig>,
    pub sa: SaParams,
    /// Skip annealing and keep the greedy proposal.
    pub skip_anneal: bool,
    /// Keep qubits shared by consecutive stages in the entanglement zone.
    pub reuse: bool,
    pub timing: TimingModel,
    pub router: RouterParams,
    pub physical: PhysicalParams,
}

impl Default for CompileOptions {
    fn default() -> Self {
        Self {
            architecture: None,
            sa: SaParams::default(),
            skip_anneal: false,
            reuse: true,
            timing: TimingModel::default(),
            router: RouterParams::default(),
            physical: PhysicalParams::default(),
        }
    }
}

#[derive(Debug, Error)]
pub enum CompileError {
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Arch(#[from] ArchError),
    #[error(transparent)]
    Placement(#[from] PlacementError),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error(transparent)]
    Fidelity(#[from] FidelityError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnealSummary {
    pub seed: u64,
    pub lambda: f64,
    pub t_initial: f64,
    pub trials: usize,
    pub accepted: usize,
    pub initial_cost: CostBreakdown,
    pub final_cost: CostBreakdown,
    /// The annealed sequence could not be routed and the proposal was used.
    pub fell_back: bool,
}

#[derive(Debug, Clone)]
pub struct Compiled {
    pub plan: StagePlan,
    pub architecture: ArchitectureConfig,
    pub placement: PlacementSequence,
    pub anneal: Option<AnnealSummary>,
    pub schedule: Schedule,
    pub fidelity: FidelityReport,
}

fn summary(out: &AnnealOutcome, fell_back: bool) -> AnnealSummary {
    AnnealSummary {
        seed: out.seed,
        lambda: out.lambda,
        t_initial: out.t_initial,
        trials: out.trials,
        accepted: out.accepted,
        initial_cost: out.initial_cost,
        final_cost: out.final_cost,
        fell_back,
    }
}

pub fn compile(circuit: &Circuit, options: &CompileOptions) -> Result<Compiled, CompileError> {
    circuit.validate()?;
    let dag = GateDag::build(circuit);
    let plan = asap_schedule(circuit, &dag);
    let config = match &options.architecture {
        Some(cfg) => {
            cfg.validate()?;
            cfg.clone()
        }
        None => ArchitectureConfig::sized_for(circuit.n_qubits, plan.max_width()),
    };
    check_capacity(&config, circuit.n_qubits, plan.max_width())?;

    let proposal = propose_sequence(circuit, &plan, &config, options.reuse)?;
    let assemble = |seq: &PlacementSequence| {
        assemble_schedule(
            circuit,
            &plan,
            &seq.occupancies(),
            &config,
            &options.timing,
            &options.router,
        )
    };

    let (placement, schedule, anneal_summary) = if options.skip_anneal {
        let s = assemble(&proposal)?;
        (proposal, s, None)
    } else {
        let out = anneal(
            circuit,
            &plan,
            &proposal,
            &config,
            &options.timing,
            &options.sa,
        )?;
        validate_sequence(&out.sequence, circuit, &plan, &config)?;
        match assemble(&out.sequence) {
            Ok(s) => {
                let sum = summary(&out, false);
                (out.sequence, s, Some(sum))
            }
            Err(ScheduleError::Route { .. }) => {
                let s = assemble(&proposal)?;
                (proposal, s, Some(summary(&out, true)))
            }
            Err(e) => return Err(e.into()),
        }
    };
    let fidelity = evaluate_fidelity(&FidelityInputs::from_schedule(&schedule), &options.physical)?;
    Ok(Compiled {
        plan,
        architecture: config,
        placement,
        anneal: anneal_summary,
        schedule,
        fidelity,
    })
}
