//! File-based orchestration of the full workflow.
//!
//! Stages talk only through artifacts in the output directory, so an
//! expensive stage (tomography, Monte Carlo) can be reused while later
//! stages are re-run with different settings. Every artifact records the
//! config hash; resuming against a mismatched configuration is rejected.
//!
//! Stage order: `generate -> infer -> synthesize -> simulate -> mitigate
//! -> report`. The requested stages must be contiguous; inputs of the
//! first requested stage are loaded from earlier artifacts on disk.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inference::{
    classical_statistical_complexity, infer_memory_states, memory_advantage_region,
    merge_states_with_delta, perturbed_coin_cq, quantum_statistical_memory, AdvantageRegion,
    EpsilonMachine, MemoryStateSet, MergeReport,
};
use crate::linalg::{CMatrix, C64};
use crate::mitigation::{
    build_pec, distribution_fidelity, exact_step_distribution, noisy_step_distribution,
    run_pec_with_records, GstShots, PecDiagnostics, QuasiprobDecomposition,
};
use crate::process::{
    conditional_distribution, effective_markov_order, generate_perturbed_coin,
    PerturbedCoinParams, SymbolSequence,
};
use crate::ptm::{ptm_of_unitary, NoiseModel};
use crate::synthesis::{build_unitary, csd_decompose, reconstruct, GateCircuit, UnitaryMatrix};

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

/// Pipeline stages in execution order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Generate,
    Infer,
    Synthesize,
    Simulate,
    Mitigate,
    Report,
}

impl Stage {
    pub const ALL: [Stage; 6] = [
        Stage::Generate,
        Stage::Infer,
        Stage::Synthesize,
        Stage::Simulate,
        Stage::Mitigate,
        Stage::Report,
    ];

    pub fn parse(name: &str) -> Result<Stage> {
        match name.trim() {
            "generate" => Ok(Stage::Generate),
            "infer" => Ok(Stage::Infer),
            "synthesize" => Ok(Stage::Synthesize),
            "simulate" => Ok(Stage::Simulate),
            "mitigate" => Ok(Stage::Mitigate),
            "report" => Ok(Stage::Report),
            other => Err(Error::Config(format!("unknown stage `{other}`"))),
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Stage::Generate => "generate",
            Stage::Infer => "infer",
            Stage::Synthesize => "synthesize",
            Stage::Simulate => "simulate",
            Stage::Mitigate => "mitigate",
            Stage::Report => "report",
        };
        f.write_str(name)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProcessConfig {
    pub p: f64,
    pub n: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub initial_state: u8,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InferConfig {
    #[serde(alias = "L")]
    pub l: usize,
    #[serde(default)]
    pub delta_override: Option<f64>,
    /// Tolerance for the effective Markov order; defaults to
    /// `1/sqrt(n_process)`.
    #[serde(default)]
    pub xi: Option<f64>,
    #[serde(default = "default_l_max")]
    pub l_max: usize,
}

fn default_l_max() -> usize {
    4
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GstConfig {
    /// `"exact"` or a positive shot count.
    pub shots: toml::Value,
}

impl GstConfig {
    pub fn shots(&self) -> Result<GstShots> {
        match &self.shots {
            toml::Value::String(s) if s == "exact" => Ok(GstShots::Exact),
            toml::Value::Integer(n) if *n > 0 => Ok(GstShots::Shots(*n as u64)),
            other => Err(Error::Config(format!(
                "gst.shots must be \"exact\" or a positive integer, got {other}"
            ))),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McConfig {
    pub runs: u64,
    #[serde(default)]
    pub chunk_size: Option<u64>,
    #[serde(default)]
    pub seed: u64,
    /// Emission steps `t` simulated and mitigated.
    #[serde(default = "default_steps")]
    pub steps: usize,
}

fn default_steps() -> usize {
    2
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub process: ProcessConfig,
    pub infer: InferConfig,
    #[serde(default = "NoiseModel::ideal")]
    pub noise: NoiseModel,
    pub gst: GstConfig,
    pub mc: McConfig,
    /// Output directory; usually supplied by the CLI `--out` flag.
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    /// Stages to run; defaults to all of them.
    #[serde(default)]
    pub stages: Option<Vec<String>>,
}

impl PipelineConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: PipelineConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.process.p) {
            return Err(Error::Config(format!("process.p = {} outside [0, 1]", self.process.p)));
        }
        if self.process.n == 0 {
            return Err(Error::Config("process.n must be positive".into()));
        }
        if self.infer.l == 0 {
            return Err(Error::Config("infer.L must be at least 1".into()));
        }
        self.noise.validate()?;
        self.gst.shots()?;
        if self.mc.runs == 0 || self.mc.steps == 0 {
            return Err(Error::Config("mc.runs and mc.steps must be positive".into()));
        }
        self.parse_stages()?;
        Ok(())
    }

    /// Requested stages, validated to be a contiguous run.
    pub fn parse_stages(&self) -> Result<Vec<Stage>> {
        let stages: Vec<Stage> = match &self.stages {
            None => Stage::ALL.to_vec(),
            Some(names) => {
                let mut parsed: Vec<Stage> =
                    names.iter().map(|s| Stage::parse(s)).collect::<Result<_>>()?;
                parsed.sort();
                parsed.dedup();
                parsed
            }
        };
        if stages.is_empty() {
            return Err(Error::Config("no stages requested".into()));
        }
        let first = Stage::ALL.iter().position(|s| *s == stages[0]).unwrap();
        for (offset, stage) in stages.iter().enumerate() {
            if Stage::ALL.get(first + offset) != Some(stage) {
                return Err(Error::Config(
                    "stages must form a contiguous chain (each stage feeds the next)".into(),
                ));
            }
        }
        Ok(stages)
    }

    /// Stable hash of the scientific configuration (stages and output
    /// location excluded, so partial reruns can resume).
    pub fn config_hash(&self) -> String {
        let mut canon = self.clone();
        canon.output_dir = None;
        canon.stages = None;
        let text = toml::to_string(&canon).expect("config serializes");
        format!("{:016x}", fnv1a(text.as_bytes()))
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf29ce484222325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

// ---------------------------------------------------------------------------
// Artifacts
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Provenance {
    pub config_hash: String,
    pub stage: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GenerateArtifact {
    pub provenance: Provenance,
    pub n: usize,
    pub p: f64,
    pub seed: u64,
    pub initial_state: u8,
    pub flip_fraction: f64,
    pub sequence_file: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InferArtifact {
    pub provenance: Provenance,
    pub history_len: usize,
    pub xi: f64,
    pub r_eff: usize,
    pub r_eff_converged: bool,
    pub delta: f64,
    pub c_mu: f64,
    pub cq_inferred: f64,
    /// Closed-form reference for the perturbed coin at the configured `p`.
    pub cq_closed_form: f64,
    pub merged: MemoryStateSet,
    pub merge_report: MergeReport,
    /// Weight-averaged cluster transition probabilities.
    pub machine_transitions: Vec<Vec<Option<(usize, f64)>>>,
    pub machine_stationary: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SynthesizeArtifact {
    pub provenance: Provenance,
    pub memory_dim: usize,
    pub alphabet_size: u8,
    /// Unitary entries as `[re, im]` pairs, row-major.
    pub unitary: Vec<Vec<[f64; 2]>>,
    /// Memory states in the circuit basis (rows, lower triangular).
    pub state_coords: Vec<Vec<f64>>,
    pub circuit: GateCircuit,
    pub gate_count: usize,
    pub depth_reported: usize,
    pub unitarity_error: f64,
    pub gram_error: f64,
    pub reconstruction_error: f64,
}

impl SynthesizeArtifact {
    pub fn unitary_matrix(&self) -> Result<UnitaryMatrix> {
        let rows = self.unitary.len();
        let m = CMatrix::from_fn(rows, rows, |i, j| {
            C64::new(self.unitary[i][j][0], self.unitary[i][j][1])
        });
        UnitaryMatrix::new(m)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SimulateArtifact {
    pub provenance: Provenance,
    pub steps: usize,
    /// `ideal[t-1]` is the noiseless t-step outcome distribution.
    pub ideal: Vec<Vec<f64>>,
    pub noisy: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MitigateStepResult {
    pub t: usize,
    pub n_mc: u64,
    pub chunk_size: u64,
    pub cost: f64,
    pub sigma_predicted: f64,
    pub p_qem: Vec<f64>,
    /// Per-chunk estimates of `P(x^(t) = 1)` (the final emitted bit).
    pub chunk_marginals: Vec<f64>,
    pub chunk_marginal_std: f64,
    pub records_file: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GstArtifact {
    pub provenance: Provenance,
    pub dataset: crate::mitigation::GstDataset,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MitigateArtifact {
    pub provenance: Provenance,
    pub diagnostics: PecDiagnostics,
    pub decompositions: DecompositionSummary,
    pub per_step: Vec<MitigateStepResult>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecompositionSummary {
    pub operator: QuasiprobDecomposition,
    pub preparation: QuasiprobDecomposition,
    pub reset: QuasiprobDecomposition,
    pub measurement: QuasiprobDecomposition,
}

/// Figure-ready summary of the whole run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReportBundle {
    pub provenance: Provenance,
    pub seeds: SeedRecord,
    pub steps: usize,
    pub distributions: Vec<DistributionTriple>,
    pub sigma: Vec<SigmaRecord>,
    pub fidelities: Vec<FidelityRecord>,
    pub costs: CostRecord,
    pub c_mu: f64,
    pub cq_inferred: f64,
    pub cq_closed_form: f64,
    pub advantage: AdvantageRegion,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SeedRecord {
    pub process: u64,
    pub synthesis: u64,
    pub gst: u64,
    pub mc: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DistributionTriple {
    pub t: usize,
    pub outcomes: Vec<String>,
    pub ideal: Vec<f64>,
    pub noisy: Vec<f64>,
    pub mitigated: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SigmaRecord {
    pub t: usize,
    pub predicted: f64,
    pub chunk_std_measured: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FidelityRecord {
    pub t: usize,
    pub mitigated: f64,
    pub noisy: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CostRecord {
    pub operator: f64,
    pub preparation: f64,
    pub measurement: f64,
    pub reset: f64,
    pub total_per_t: Vec<f64>,
}

// ---------------------------------------------------------------------------
// Execution
// ---------------------------------------------------------------------------

const SYNTH_SEED_TAG: u64 = 1;
const GST_SEED_TAG: u64 = 2;

fn seed_for(base: u64, tag: u64) -> u64 {
    base.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(tag)
}

struct StageIo<'a> {
    dir: &'a Path,
    hash: String,
}

impl StageIo<'_> {
    fn provenance(&self, stage: Stage) -> Provenance {
        Provenance { config_hash: self.hash.clone(), stage: stage.to_string() }
    }

    fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<()> {
        let path = self.dir.join(name);
        let text = serde_json::to_string_pretty(value)?;
        std::fs::write(path, text)?;
        Ok(())
    }

    fn read_json<T: for<'de> Deserialize<'de> + HasProvenance>(&self, name: &str) -> Result<T> {
        let path = self.dir.join(name);
        if !path.exists() {
            return Err(Error::MissingStageData(format!(
                "{} (run the earlier stages first)",
                path.display()
            )));
        }
        let value: T = serde_json::from_str(&std::fs::read_to_string(&path)?)?;
        if value.provenance().config_hash != self.hash {
            return Err(Error::Config(format!(
                "{} was produced under config {} but the current config hashes to {}",
                path.display(),
                value.provenance().config_hash,
                self.hash
            )));
        }
        Ok(value)
    }
}

trait HasProvenance {
    fn provenance(&self) -> &Provenance;
}

macro_rules! has_provenance {
    ($($ty:ty),*) => {
        $(impl HasProvenance for $ty {
            fn provenance(&self) -> &Provenance { &self.provenance }
        })*
    };
}

has_provenance!(
    GenerateArtifact,
    InferArtifact,
    SynthesizeArtifact,
    SimulateArtifact,
    MitigateArtifact,
    ReportBundle
);

/// Run the configured stages, writing one artifact file per stage, and
/// return the final report when the `report` stage ran.
pub fn run_pipeline(config: &PipelineConfig) -> Result<Option<ReportBundle>> {
    let dir = config
        .output_dir
        .clone()
        .ok_or_else(|| Error::Config("output directory not set (pass --out)".into()))?;
    std::fs::create_dir_all(&dir)?;
    let io = StageIo { dir: &dir, hash: config.config_hash() };
    let stages = config.parse_stages()?;
    let mut bundle = None;
    for stage in stages {
        let result = match stage {
            Stage::Generate => stage_generate(config, &io).map(|_| None),
            Stage::Infer => stage_infer(config, &io).map(|_| None),
            Stage::Synthesize => stage_synthesize(config, &io).map(|_| None),
            Stage::Simulate => stage_simulate(config, &io).map(|_| None),
            Stage::Mitigate => stage_mitigate(config, &io).map(|_| None),
            Stage::Report => stage_report(config, &io).map(Some),
        };
        match result {
            Ok(Some(b)) => bundle = Some(b),
            Ok(None) => {}
            Err(e) => {
                return Err(Error::StageFailure { stage: stage.to_string(), source: Box::new(e) })
            }
        }
    }
    Ok(bundle)
}

fn stage_generate(config: &PipelineConfig, io: &StageIo) -> Result<GenerateArtifact> {
    let params = PerturbedCoinParams::new(config.process.p, config.process.seed)?
        .with_initial_state(config.process.initial_state);
    let seq = generate_perturbed_coin(params, config.process.n)?;
    let flips = seq.symbols.windows(2).filter(|w| w[0] != w[1]).count();
    seq.write_file(&io.dir.join("sequence.txt"))?;
    let artifact = GenerateArtifact {
        provenance: io.provenance(Stage::Generate),
        n: seq.len(),
        p: config.process.p,
        seed: config.process.seed,
        initial_state: config.process.initial_state,
        flip_fraction: flips as f64 / (seq.len().saturating_sub(1)).max(1) as f64,
        sequence_file: "sequence.txt".into(),
    };
    io.write_json("generate.json", &artifact)?;
    Ok(artifact)
}

fn stage_infer(config: &PipelineConfig, io: &StageIo) -> Result<InferArtifact> {
    let gen: GenerateArtifact = io.read_json("generate.json")?;
    let seq = SymbolSequence::read_file(&io.dir.join(&gen.sequence_file), 2)?;
    let l = config.infer.l;
    let cond = conditional_distribution(&seq, l)?;
    let xi = config.infer.xi.unwrap_or(1.0 / (seq.len() as f64).sqrt());
    let order = effective_markov_order(&seq, xi, config.infer.l_max.max(l))?;
    let set = infer_memory_states(&cond, l)?;
    let delta = config
        .infer
        .delta_override
        .unwrap_or(0.5 / (seq.len() as f64).sqrt());
    let (merged, report) = merge_states_with_delta(&set, delta)?;
    let machine = EpsilonMachine::from_merged(&merged, &cond, &report)?;
    let artifact = InferArtifact {
        provenance: io.provenance(Stage::Infer),
        history_len: l,
        xi,
        r_eff: order.r_eff,
        r_eff_converged: order.converged,
        delta,
        c_mu: classical_statistical_complexity(&machine),
        cq_inferred: quantum_statistical_memory(&merged),
        cq_closed_form: perturbed_coin_cq(config.process.p),
        merged,
        merge_report: report,
        machine_transitions: machine.transitions.clone(),
        machine_stationary: machine.stationary.clone(),
    };
    io.write_json("infer.json", &artifact)?;
    Ok(artifact)
}

fn stage_synthesize(config: &PipelineConfig, io: &StageIo) -> Result<SynthesizeArtifact> {
    let infer: InferArtifact = io.read_json("infer.json")?;
    let seed = seed_for(config.process.seed, SYNTH_SEED_TAG);
    let model = build_unitary(&infer.merged, seed)?;
    let circuit = csd_decompose(&model.unitary)?;
    let reconstruction_error = reconstruct(&circuit).max_abs_diff(model.unitary.matrix());
    let gram = infer.merged.gram();
    let coords = &model.state_coords;
    let m = infer.merged.n_states();
    let mut gram_error = 0.0f64;
    for i in 0..m {
        for j in 0..m {
            let dot: f64 = (0..m).map(|k| coords[(i, k)] * coords[(j, k)]).sum();
            gram_error = gram_error.max((dot - gram[(i, j)]).abs());
        }
    }
    let dim = model.unitary.dim();
    let matrix = model.unitary.matrix();
    let artifact = SynthesizeArtifact {
        provenance: io.provenance(Stage::Synthesize),
        memory_dim: model.memory_dim,
        alphabet_size: model.alphabet_size,
        unitary: (0..dim)
            .map(|i| (0..dim).map(|j| [matrix[(i, j)].re, matrix[(i, j)].im]).collect())
            .collect(),
        state_coords: (0..m).map(|i| coords.row(i)).collect(),
        gate_count: circuit.gates.len(),
        depth_reported: circuit.depth_reported,
        circuit,
        unitarity_error: matrix.unitarity_error(),
        gram_error,
        reconstruction_error,
    };
    io.write_json("synthesize.json", &artifact)?;
    Ok(artifact)
}

fn stage_simulate(config: &PipelineConfig, io: &StageIo) -> Result<SimulateArtifact> {
    let synth: SynthesizeArtifact = io.read_json("synthesize.json")?;
    let unitary = synth.unitary_matrix()?;
    let op = ptm_of_unitary(&unitary);
    let noisy_op = config.noise.register_channel(op.n_qubits).compose(&op);
    let mut ideal = Vec::new();
    let mut noisy = Vec::new();
    for t in 1..=config.mc.steps {
        ideal.push(exact_step_distribution(&op, t)?);
        noisy.push(noisy_step_distribution(&noisy_op, t, &config.noise)?);
    }
    let artifact = SimulateArtifact {
        provenance: io.provenance(Stage::Simulate),
        steps: config.mc.steps,
        ideal,
        noisy,
    };
    io.write_json("simulate.json", &artifact)?;
    Ok(artifact)
}

fn stage_mitigate(config: &PipelineConfig, io: &StageIo) -> Result<MitigateArtifact> {
    let synth: SynthesizeArtifact = io.read_json("synthesize.json")?;
    let unitary = synth.unitary_matrix()?;
    let op = ptm_of_unitary(&unitary);
    let gst_seed = seed_for(config.mc.seed, GST_SEED_TAG);
    let shots = config.gst.shots()?;
    let built = build_pec(&op, &config.noise, shots, gst_seed, 1)?;
    io.write_json("gst.json", &GstArtifact {
        provenance: io.provenance(Stage::Mitigate),
        dataset: built.gst,
    })?;
    let (mut plan, diagnostics) = (built.plan, built.diagnostics);
    let decompositions = DecompositionSummary {
        operator: plan.op_decomp.clone(),
        preparation: plan.prep_decomp.clone(),
        reset: plan.reset_decomp.clone(),
        measurement: plan.meas_decomp.clone(),
    };

    let mut per_step = Vec::new();
    for t in 1..=config.mc.steps {
        plan.steps = t;
        let chunk = config.mc.chunk_size.unwrap_or((config.mc.runs / 100).max(1));
        let mc_seed = seed_for(config.mc.seed, t as u64);
        let (dist, records) = run_pec_with_records(&plan, config.mc.runs, mc_seed, Some(chunk))?;
        let records_file = format!("mc_records_t{t}.csv");
        write_records_csv(&io.dir.join(&records_file), &io.hash, t, &records)?;
        // Chunk histogram of the final emitted bit.
        let chunk_marginals: Vec<f64> = dist
            .chunk_estimates
            .as_ref()
            .expect("chunking requested")
            .iter()
            .map(|est| {
                est.iter().enumerate().filter(|(w, _)| w & 1 == 1).map(|(_, v)| v).sum()
            })
            .collect();
        let chunk_marginal_std = std_dev(&chunk_marginals);
        per_step.push(MitigateStepResult {
            t,
            n_mc: dist.n_mc,
            chunk_size: chunk,
            cost: dist.cost,
            sigma_predicted: dist.sigma_predicted,
            p_qem: dist.p_qem.clone(),
            chunk_marginals,
            chunk_marginal_std,
            records_file,
        });
    }
    let artifact = MitigateArtifact {
        provenance: io.provenance(Stage::Mitigate),
        diagnostics,
        decompositions,
        per_step,
    };
    io.write_json("mitigate.json", &artifact)?;
    Ok(artifact)
}

fn std_dev(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
        / (values.len() - 1) as f64;
    var.sqrt()
}

fn write_records_csv(path: &Path, hash: &str, t: usize, records: &[(u32, i8)]) -> Result<()> {
    use std::io::Write;
    let file = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(file);
    writeln!(w, "# {{\"config_hash\":\"{hash}\",\"stage\":\"mitigate\",\"steps\":{t}}}")?;
    writeln!(w, "run,outcome,sign")?;
    for (i, (word, sign)) in records.iter().enumerate() {
        writeln!(w, "{i},{word:0width$b},{sign}", width = t)?;
    }
    Ok(())
}

fn stage_report(config: &PipelineConfig, io: &StageIo) -> Result<ReportBundle> {
    let infer: InferArtifact = io.read_json("infer.json")?;
    let sim: SimulateArtifact = io.read_json("simulate.json")?;
    let mit: MitigateArtifact = io.read_json("mitigate.json")?;

    let mut distributions = Vec::new();
    let mut sigma = Vec::new();
    let mut fidelities = Vec::new();
    let mut total_per_t = Vec::new();
    for step in &mit.per_step {
        let t = step.t;
        let ideal = sim.ideal[t - 1].clone();
        let noisy = sim.noisy[t - 1].clone();
        let mitigated = step.p_qem.clone();
        let clipped: Vec<f64> = {
            let c: Vec<f64> = mitigated.iter().map(|&p| p.max(0.0)).collect();
            let total: f64 = c.iter().sum();
            c.iter().map(|&p| p / total).collect()
        };
        fidelities.push(FidelityRecord {
            t,
            mitigated: distribution_fidelity(&ideal, &clipped),
            noisy: distribution_fidelity(&ideal, &noisy),
        });
        sigma.push(SigmaRecord {
            t,
            predicted: step.cost / (step.chunk_size as f64).sqrt(),
            chunk_std_measured: step.chunk_marginal_std,
        });
        total_per_t.push(step.cost);
        distributions.push(DistributionTriple {
            t,
            outcomes: (0..1usize << t).map(|w| format!("{w:0t$b}")).collect(),
            ideal,
            noisy,
            mitigated,
        });
    }
    let advantage = memory_advantage_region(config.mc.runs as f64, 2500.0, infer.c_mu.max(1e-9));
    let bundle = ReportBundle {
        provenance: io.provenance(Stage::Report),
        seeds: SeedRecord {
            process: config.process.seed,
            synthesis: seed_for(config.process.seed, SYNTH_SEED_TAG),
            gst: seed_for(config.mc.seed, GST_SEED_TAG),
            mc: config.mc.seed,
        },
        steps: config.mc.steps,
        distributions,
        sigma,
        fidelities,
        costs: CostRecord {
            operator: mit.decompositions.operator.cost,
            preparation: mit.decompositions.preparation.cost,
            measurement: mit.decompositions.measurement.cost,
            reset: mit.decompositions.reset.cost,
            total_per_t,
        },
        c_mu: infer.c_mu,
        cq_inferred: infer.cq_inferred,
        cq_closed_form: infer.cq_closed_form,
        advantage,
    };
    io.write_json("report.json", &bundle)?;
    Ok(bundle)
}

// ---------------------------------------------------------------------------
// Figure data
// ---------------------------------------------------------------------------

/// Figure families the report stage can export.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Figure {
    JointDist,
    ChunkHist,
    CqVsP,
}

impl Figure {
    pub fn parse(name: &str) -> Result<Figure> {
        match name {
            "joint_dist" => Ok(Figure::JointDist),
            "chunk_hist" => Ok(Figure::ChunkHist),
            "cq_vs_p" => Ok(Figure::CqVsP),
            other => Err(Error::Config(format!(
                "unknown figure `{other}` (expected joint_dist, chunk_hist, or cq_vs_p)"
            ))),
        }
    }
}

/// Write one figure-ready CSV from the artifacts in `bundle_dir`; returns
/// the written path.
pub fn emit_figure_data(bundle_dir: &Path, which: Figure) -> Result<PathBuf> {
    use std::io::Write;
    let report_path = bundle_dir.join("report.json");
    if !report_path.exists() {
        return Err(Error::MissingStageData(format!(
            "{} (run the report stage first)",
            report_path.display()
        )));
    }
    let bundle: ReportBundle = serde_json::from_str(&std::fs::read_to_string(&report_path)?)?;
    let hash = &bundle.provenance.config_hash;
    let path = match which {
        Figure::JointDist => {
            let path = bundle_dir.join("joint_dist.csv");
            let mut w = std::io::BufWriter::new(std::fs::File::create(&path)?);
            writeln!(w, "# {{\"config_hash\":\"{hash}\",\"figure\":\"joint_dist\"}}")?;
            writeln!(w, "t,outcome,ideal,noisy,mitigated")?;
            for triple in &bundle.distributions {
                for (i, outcome) in triple.outcomes.iter().enumerate() {
                    writeln!(
                        w,
                        "{},{},{},{},{}",
                        triple.t, outcome, triple.ideal[i], triple.noisy[i], triple.mitigated[i]
                    )?;
                }
            }
            path
        }
        Figure::ChunkHist => {
            let io = StageIo { dir: bundle_dir, hash: hash.clone() };
            let mit: MitigateArtifact = io.read_json("mitigate.json")?;
            let path = bundle_dir.join("chunk_hist.csv");
            let mut w = std::io::BufWriter::new(std::fs::File::create(&path)?);
            writeln!(w, "# {{\"config_hash\":\"{hash}\",\"figure\":\"chunk_hist\"}}")?;
            writeln!(w, "t,chunk,p_qem_last_bit_one")?;
            for step in &mit.per_step {
                for (c, est) in step.chunk_marginals.iter().enumerate() {
                    writeln!(w, "{},{},{}", step.t, c, est)?;
                }
            }
            path
        }
        Figure::CqVsP => {
            let path = bundle_dir.join("cq_vs_p.csv");
            let mut w = std::io::BufWriter::new(std::fs::File::create(&path)?);
            let adv = &bundle.advantage;
            writeln!(
                w,
                "# {{\"config_hash\":\"{hash}\",\"figure\":\"cq_vs_p\",\"advantage_interval\":[{},{}],\"cq_threshold\":{}}}",
                adv.p_interval.0, adv.p_interval.1, adv.cq_threshold
            )?;
            writeln!(w, "p,c_mu,c_q")?;
            for k in 1..=199u32 {
                let p = k as f64 / 200.0;
                let machine = EpsilonMachine::perturbed_coin(p);
                writeln!(
                    w,
                    "{},{},{}",
                    p,
                    classical_statistical_complexity(&machine),
                    perturbed_coin_cq(p)
                )?;
            }
            path
        }
    };
    Ok(path)
}
