//! Command-line interface.
//!
//! Exit codes: `0` all checks passed / verdict equivalent, `1` a check
//! failed or the verdict is not-equivalent, `2` usage, spec, or scope
//! errors (unreadable files, sequences outside the certified class,
//! evaluation outside the model disc).

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use crate::equivalence::{
    build_block_unitary, compare_invariants, decide_nonperiodic, joint_multiplicity_oracle,
    wold_isometry_oracle, EquivWitness, ShiftPresentation, Verdict,
};
use crate::error::{CliError, EquivalenceError, SpecError};
use crate::report::{Report, ReportItem, Status};
use crate::seqclass::MomentSequenceSpec;
use crate::shift::BalanceOutcome;
use crate::specfile::{self, LoadedShift};
use crate::tree::RootedTree;
use crate::wandering::{
    check_mutual_orthogonality, completeness_check, gram_restriction, WanderingDecomposition,
};
use crate::{analytic, examples, tol};

/// Seed used when neither `--seed` nor `TREESHIFT_SEED` is given.
pub const DEFAULT_SEED: u64 = 2_718_281_828;

#[derive(Debug, Parser)]
#[command(
    name = "treeshift",
    version,
    about = "weighted shifts on rooted directed trees: balance checks, adjoint-kernel \
             decompositions, and unitary-equivalence decisions"
)]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Seed for randomized checks; defaults to $TREESHIFT_SEED, then a
    /// fixed constant.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Oracle {
    /// Moment sequence plus generation cardinalities (gated to certified
    /// non-periodic sequences).
    Theorem,
    /// Eigenvalue multiplicities of the moment operators on the adjoint
    /// kernel.
    Joint,
    /// Wold multiplicity, for isometric shifts only.
    Wold,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Inspect a tree spec: cardinalities, branching, generation profile.
    TreeInfo {
        file: PathBuf,
        /// Extend the cardinality profile up to this generation.
        #[arg(long, default_value_t = 12)]
        profile_to: usize,
    },
    /// Structural checks for a weighted shift: balance, adjoint kernel,
    /// orthogonality of the wandering blocks, completeness, gram moments.
    Verify {
        file: PathBuf,
        /// Highest power of the shift used by the sweeps.
        #[arg(long, default_value_t = 3)]
        window: usize,
        /// Random trials for the pairing checks.
        #[arg(long, default_value_t = 20)]
        trials: usize,
    },
    /// Adjoint-kernel decomposition and gram-restriction diagnostics.
    Kernel {
        file: PathBuf,
        #[arg(long, default_value_t = 3)]
        window: usize,
    },
    /// Decide unitary equivalence of two shifts.
    Equiv {
        #[arg(long)]
        left: PathBuf,
        #[arg(long)]
        right: PathBuf,
        #[arg(long, value_enum, default_value_t = Oracle::Theorem)]
        oracle: Oracle,
        /// Powers inspected by the joint oracle / block-unitary check.
        #[arg(long, default_value_t = 6)]
        window: usize,
    },
    /// Evaluate the reproducing kernel of the analytic model at (z, w).
    KernelEval {
        file: PathBuf,
        /// Complex number, e.g. "0.3+0.1i" or "0.25".
        #[arg(long)]
        z: String,
        #[arg(long)]
        w: String,
        #[arg(long, default_value_t = tol::DEFAULT_SERIES_ORDER)]
        order: usize,
    },
    /// Bounded-point-evaluation radius via Cauchy-dual power norms.
    Bpe {
        file: PathBuf,
        #[arg(long, default_value_t = tol::DEFAULT_SERIES_ORDER)]
        order: usize,
    },
    /// Classify a moment sequence: periodic, eventually periodic,
    /// non-periodic, or undetermined prefix.
    ClassifySeq { file: PathBuf },
    /// Bundled example specs.
    Examples {
        #[command(subcommand)]
        action: ExamplesAction,
    },
}

#[derive(Debug, Subcommand)]
pub enum ExamplesAction {
    /// List the bundled examples.
    List,
    /// Write the bundled spec files into a directory.
    Emit {
        #[arg(long)]
        dir: PathBuf,
    },
    /// Demonstrate the isometric pair on which the invariants disagree
    /// while the operators are unitarily equivalent.
    Counterexample,
}

pub fn main_entry() -> ExitCode {
    let cli = Cli::parse();
    let json = cli.format == Format::Json;
    match run(cli) {
        Ok(report) => {
            print!("{}", report.render(json));
            if report.status.is_pass() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn resolve_seed(flag: Option<u64>) -> u64 {
    flag.or_else(|| {
        std::env::var("TREESHIFT_SEED")
            .ok()
            .and_then(|s| s.parse().ok())
    })
    .unwrap_or(DEFAULT_SEED)
}

pub fn run(cli: Cli) -> Result<Report, CliError> {
    let seed = resolve_seed(cli.seed);
    match cli.command {
        Command::TreeInfo { file, profile_to } => tree_info(&file, profile_to),
        Command::Verify {
            file,
            window,
            trials,
        } => verify(&file, window, trials, seed),
        Command::Kernel { file, window } => kernel(&file, window),
        Command::Equiv {
            left,
            right,
            oracle,
            window,
        } => equiv(&left, &right, oracle, window),
        Command::KernelEval { file, z, w, order } => kernel_eval(&file, &z, &w, order),
        Command::Bpe { file, order } => bpe(&file, order),
        Command::ClassifySeq { file } => classify_seq(&file),
        Command::Examples { action } => match action {
            ExamplesAction::List => examples_list(),
            ExamplesAction::Emit { dir } => examples_emit(&dir),
            ExamplesAction::Counterexample => examples_counterexample(),
        },
    }
}

/// A tree spec, or the tree of a shift spec.
fn load_tree_lenient(path: &Path) -> Result<RootedTree, CliError> {
    match specfile::load_tree(path) {
        Ok(tree) => Ok(tree),
        Err(tree_err) => match specfile::load_shift(path) {
            Ok(loaded) => Ok((*loaded.tree).clone()),
            Err(_) => Err(tree_err.into()),
        },
    }
}

/// A sequence spec, or the sequence attached to a shift spec.
fn load_sequence_lenient(path: &Path) -> Result<MomentSequenceSpec, CliError> {
    match specfile::load_sequence(path) {
        Ok(seq) => Ok(seq),
        Err(seq_err) => match specfile::load_shift(path) {
            Ok(loaded) => Ok(loaded.seq_spec()?),
            Err(_) => Err(seq_err.into()),
        },
    }
}

fn tree_info(file: &Path, profile_to: usize) -> Result<Report, CliError> {
    let tree = load_tree_lenient(file)?;
    let mut report = Report::new("tree-info")
        .config("file", file.display())
        .config("profile_to", profile_to);

    let cards = tree.prefix_cards();
    report.push(
        ReportItem::new("tree", Status::Pass)
            .metric("vertices", tree.vertex_count() as f64)
            .metric("truncation_depth", tree.truncation_depth() as f64)
            .details(&serde_json::json!({
                "cards": cards,
                "tail": tree.tail().map(specfile::TailSpec::from_rule),
            })),
    );

    let branching = tree.branching_index();
    report.push(
        ReportItem::new("branching-index", Status::Pass)
            .cert(branching.cert)
            .metric(
                "branching_vertices",
                tree.branching_vertices().len() as f64,
            )
            .note(format!("branching index: {}", branching.value)),
    );

    let profile = tree.generation_profile();
    let mut listed = Vec::new();
    let mut truncated_at = None;
    for n in 0..=profile_to {
        match profile.card(n) {
            Some(c) => listed.push(c.to_string()),
            None => {
                truncated_at = Some(n);
                break;
            }
        }
    }
    let mut item = ReportItem::new("generation-profile", Status::Pass)
        .details(&serde_json::json!({ "cards": listed }));
    if let Some(n) = truncated_at {
        item = item.note(format!(
            "cardinalities from generation {n} on need a tail rule"
        ));
    }
    report.push(item);
    Ok(report)
}

fn verify(file: &Path, window: usize, trials: usize, seed: u64) -> Result<Report, CliError> {
    let loaded = specfile::load_shift(file)?;
    let s = &loaded.shift;
    let depth = s.tree().truncation_depth();
    let window = window.clamp(1, depth.max(1));
    let mut report = Report::new("verify")
        .seed(seed)
        .config("file", file.display())
        .config("window", window)
        .config("trials", trials);

    let balance = s.balance(tol::BALANCE_REL);
    let balanced = balance.is_balanced();
    match &balance {
        BalanceOutcome::Balanced(table) => report.push(
            ReportItem::new("balance", Status::Pass)
                .metric("generations", table.len() as f64)
                .details(&serde_json::json!({ "c": table.values() })),
        ),
        BalanceOutcome::Unbalanced(w) => report.push(
            ReportItem::new("balance", Status::Fail)
                .metric("rel_gap", w.rel_gap)
                .details(w),
        ),
    }

    match s.local_power_balance_witness(tol::BALANCE_REL) {
        Ok(None) => report.push(ReportItem::new("power-balance", Status::Pass)),
        Ok(Some(w)) => report.push(
            ReportItem::new("power-balance", Status::Fail)
                .metric("order", w.order as f64)
                .metric("left", w.norm_left)
                .metric("right", w.norm_right)
                .note(format!(
                    "siblings {} and {} disagree at power {}",
                    s.tree().label(w.left),
                    s.tree().label(w.right),
                    w.order
                )),
        ),
        Err(e) => report.push(ReportItem::new("power-balance", Status::Fail).note(e.to_string())),
    }

    let decomp = WanderingDecomposition::kernel_basis(s);
    let residual = decomp.adjoint_kernel_residual(s);
    report.push(
        ReportItem::new("adjoint-kernel", Status::of(residual <= tol::KERNEL_ABS))
            .metric("residual", residual)
            .metric("tolerance", tol::KERNEL_ABS),
    );

    let dims: Vec<u64> = decomp.dims().iter().map(|&d| d as u64).collect();
    let cards = s.tree().prefix_cards();
    let expected: Vec<u64> = std::iter::once(1)
        .chain(cards.windows(2).map(|w| w[1].saturating_sub(w[0])))
        .collect();
    report.push(
        ReportItem::new("kernel-dimensions", Status::of(dims == expected))
            .metric("total", decomp.total_dim() as f64)
            .details(&serde_json::json!({ "dims": dims, "expected": expected })),
    );

    match check_mutual_orthogonality(s, &decomp, window, tol::ORTHOGONALITY_ABS) {
        Ok(orth) => {
            let mut item = ReportItem::new("orthogonality", Status::of(orth.pass))
                .metric("max_abs", orth.max_abs)
                .metric("pairs_checked", orth.pairs_checked as f64)
                .metric("tolerance", orth.tolerance);
            if let Some(w) = &orth.witness {
                item = item.details(w);
            }
            report.push(item);
        }
        Err(e) => report.push(ReportItem::new("orthogonality", Status::Fail).note(e.to_string())),
    }

    match completeness_check(s, &decomp, depth) {
        Ok(c) => report.push(
            ReportItem::new("completeness", Status::of(c.pass))
                .metric("generations", c.upto as f64 + 1.0)
                .details(&c.ranks),
        ),
        Err(e) => report.push(ReportItem::new("completeness", Status::Fail).note(e.to_string())),
    }

    if balanced {
        match analytic::mz_gram_check(s, &decomp, window, trials, seed) {
            Ok(mz) => report.push(
                ReportItem::new("mz-gram", Status::of(mz.pass))
                    .metric("max_residual", mz.max_residual)
                    .metric("trials", mz.trials as f64)
                    .metric("tolerance", mz.tolerance),
            ),
            Err(e) => report.push(ReportItem::new("mz-gram", Status::Fail).note(e.to_string())),
        }
    } else {
        report.push(
            ReportItem::new("mz-gram", Status::Fail).note("requires a balanced shift"),
        );
    }

    Ok(report)
}

fn kernel(file: &Path, window: usize) -> Result<Report, CliError> {
    let loaded = specfile::load_shift(file)?;
    let s = &loaded.shift;
    let depth = s.tree().truncation_depth();
    let window = window.clamp(1, depth.max(1));
    let mut report = Report::new("kernel")
        .config("file", file.display())
        .config("window", window);

    let decomp = WanderingDecomposition::kernel_basis(s);
    report.push(
        ReportItem::new("dimensions", Status::Pass)
            .metric("total", decomp.total_dim() as f64)
            .metric("blocks", decomp.block_count() as f64)
            .details(&decomp.dims()),
    );

    let residual = decomp.adjoint_kernel_residual(s);
    report.push(
        ReportItem::new("adjoint-kernel", Status::of(residual <= tol::KERNEL_ABS))
            .metric("residual", residual),
    );

    let table = s.moment_table().ok();
    for n in 1..=window {
        let g = match gram_restriction(s, &decomp, n) {
            Ok(g) => g,
            Err(e) => {
                report.push(
                    ReportItem::new(&format!("gram-order-{n}"), Status::Fail).note(e.to_string()),
                );
                continue;
            }
        };
        let offdiag = g.max_offdiag_rel();
        let min_eig = g.min_eigenvalue();
        let mut item = ReportItem::new(&format!("gram-order-{n}"), Status::Pass)
            .metric("max_offdiag_rel", offdiag)
            .metric("min_eigenvalue", min_eig)
            .metric("blocks", g.blocks_included.len() as f64);
        let mut ok = offdiag <= tol::GRAM_REL && min_eig >= tol::PSD_MIN_EIG;
        match table.as_ref().and_then(|t| g.max_diag_rel_error(t)) {
            Some(diag_err) => {
                ok = ok && diag_err <= tol::GRAM_REL;
                item = item.metric("max_diag_rel_error", diag_err);
            }
            None => {
                item = item.note("diagonal comparison needs a balanced shift");
                ok = false;
            }
        }
        item.status = Status::of(ok);
        report.push(item);
    }

    Ok(report)
}

fn presentation(loaded: &LoadedShift) -> Result<ShiftPresentation, CliError> {
    let seq = loaded.seq_spec()?;
    Ok(ShiftPresentation::with_tree(seq, &loaded.tree))
}

fn verdict_item(name: &str, v: &crate::equivalence::EquivalenceVerdict) -> ReportItem {
    ReportItem::new(name, Status::of(v.verdict == Verdict::Equivalent))
        .cert(v.cert)
        .details(v)
}

fn equiv(left: &Path, right: &Path, oracle: Oracle, window: usize) -> Result<Report, CliError> {
    let l = specfile::load_shift(left)?;
    let r = specfile::load_shift(right)?;
    let mut report = Report::new("equiv")
        .config("left", left.display())
        .config("right", right.display())
        .config("oracle", format!("{oracle:?}").to_lowercase())
        .config("window", window);

    match oracle {
        Oracle::Theorem => {
            let (pl, pr) = (presentation(&l)?, presentation(&r)?);
            let verdict = decide_nonperiodic(&pl, &pr)?;
            report.push(verdict_item("decision", &verdict));
            if verdict.verdict == Verdict::Equivalent {
                match build_block_unitary(&l.shift, &r.shift, window) {
                    Ok(bu) => report.push(
                        ReportItem::new("block-unitary", Status::of(bu.pass))
                            .metric("powers_checked", bu.powers_checked as f64)
                            .metric("max_residual", bu.max_residual)
                            .details(&bu.dims),
                    ),
                    Err(e) => report.push(
                        ReportItem::new("block-unitary", Status::Fail).note(e.to_string()),
                    ),
                }
            }
        }
        Oracle::Joint => {
            let verdict = joint_multiplicity_oracle(&l.shift, &r.shift, window)?;
            report.push(verdict_item("joint-multiplicities", &verdict));
        }
        Oracle::Wold => {
            let verdict = wold_isometry_oracle(&l.shift, &r.shift)?;
            report.push(verdict_item("wold-multiplicity", &verdict));
        }
    }
    Ok(report)
}

fn parse_complex(text: &str) -> Result<Complex64, CliError> {
    Complex64::from_str(text).map_err(|_| {
        CliError::Usage(format!(
            "cannot parse '{text}' as a complex number (expected forms: 0.3, 0.3+0.1i, -0.2i)"
        ))
    })
}

fn kernel_eval(file: &Path, z: &str, w: &str, order: usize) -> Result<Report, CliError> {
    let loaded = specfile::load_shift(file)?;
    let (z, w) = (parse_complex(z)?, parse_complex(w)?);
    let model = analytic::ModelSpace::from_spec(loaded.seq_spec()?, &loaded.tree)
        .map_err(SpecError::Seq)?;
    let radius = model.radius();
    let value = model.kernel_eval(z, w, order)?;

    let mut report = Report::new("kernel-eval")
        .config("file", file.display())
        .config("z", z)
        .config("w", w)
        .config("order", order);
    report.push(
        ReportItem::new("model-disc", Status::Pass)
            .cert(radius.cert)
            .metric("radius", radius.value),
    );
    report.push(
        ReportItem::new("kernel-value", Status::Pass)
            .metric("blocks", value.blocks.len() as f64)
            .metric("tail_bound", value.tail_bound)
            .details(&value),
    );
    Ok(report)
}

fn bpe(file: &Path, order: usize) -> Result<Report, CliError> {
    let seq = load_sequence_lenient(file)?;
    let bpe = analytic::bpe_radius(&seq, order)?;
    let mut report = Report::new("bpe")
        .config("file", file.display())
        .config("order", order);
    let mut item = ReportItem::new("bpe-radius", Status::Pass)
        .cert(bpe.radius.cert)
        .metric("radius", bpe.radius.value)
        .metric("orders", bpe.gelfand.len() as f64);
    if let Some(&g) = bpe.gelfand.last() {
        item = item.metric("gelfand_last", g);
    }
    report.push(item.details(&serde_json::json!({
        "gelfand_tail": bpe.gelfand.iter().rev().take(4).rev().collect::<Vec<_>>(),
    })));
    Ok(report)
}

fn classify_seq(file: &Path) -> Result<Report, CliError> {
    let seq = load_sequence_lenient(file)?;
    let verdict = seq.classify();
    let sup = seq.sup();
    let mut report = Report::new("classify-seq").config("file", file.display());
    report.push(
        ReportItem::new("classification", Status::Pass)
            .cert(verdict.cert)
            .note(verdict.kind.to_string())
            .details(&verdict.kind),
    );
    report.push(
        ReportItem::new("sup", Status::Pass)
            .cert(sup.cert)
            .metric("value", sup.value),
    );
    Ok(report)
}

fn examples_list() -> Result<Report, CliError> {
    let mut report = Report::new("examples");
    for entry in examples::catalog() {
        let files: Vec<&str> = entry.files.iter().map(|(f, _)| f.as_str()).collect();
        report.push(
            ReportItem::new(entry.name, Status::Pass)
                .note(entry.description)
                .details(&files),
        );
    }
    Ok(report)
}

fn examples_emit(dir: &Path) -> Result<Report, CliError> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Write {
        path: dir.display().to_string(),
        source,
    })?;
    let mut report = Report::new("examples-emit").config("dir", dir.display());
    for entry in examples::catalog() {
        for (file, spec) in &entry.files {
            let path = dir.join(file);
            std::fs::write(&path, specfile::to_pretty_json(spec)).map_err(|source| {
                CliError::Write {
                    path: path.display().to_string(),
                    source,
                }
            })?;
            report.push(ReportItem::new(file, Status::Pass).note(path.display().to_string()));
        }
    }
    Ok(report)
}

/// Two isometries with equal Wold multiplicity but different generation
/// cardinalities: equivalent as operators, yet the invariant pair
/// disagrees — which is why the decision procedure requires certified
/// non-periodic moment sequences.
fn examples_counterexample() -> Result<Report, CliError> {
    let entry = examples::find("isometric-pair").expect("bundled example exists");
    let l = entry.files[0].1.build()?;
    let r = entry.files[1].1.build()?;
    let mut report = Report::new("examples-counterexample");

    let wold = wold_isometry_oracle(&l.shift, &r.shift)?;
    report.push(
        ReportItem::new(
            "wold-equivalent",
            Status::of(wold.verdict == Verdict::Equivalent),
        )
        .cert(wold.cert)
        .details(&wold),
    );

    let (pl, pr) = (presentation(&l)?, presentation(&r)?);
    let cmp = compare_invariants(&pl, &pr);
    let mismatch_at_one = matches!(
        &cmp.value,
        Some(EquivWitness::Generation { index: 1, .. })
    );
    report.push(
        ReportItem::new("invariants-disagree", Status::of(mismatch_at_one))
            .cert(cmp.cert)
            .details(&cmp.value)
            .note("generation cardinalities 1,2,2,... versus 1,1,2,2,..."),
    );

    let refused = matches!(
        decide_nonperiodic(&pl, &pr),
        Err(EquivalenceError::NotNonPeriodic { .. })
    );
    report.push(
        ReportItem::new("decision-refused", Status::of(refused)).note(
            "isometric moment sequences are periodic, outside the certified scope",
        ),
    );
    Ok(report)
}
