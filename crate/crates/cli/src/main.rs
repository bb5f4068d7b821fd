//! gsup: dataset generation, dimension reduction, tau scanning, clustering
//! and evaluation as composable subcommands. Reports are grep-able
//! key=value lines; every stochastic command takes an explicit --seed.

use clap::{Args, Parser, Subcommand, ValueEnum};
use gsup_core::baselines::{gap_statistic, kmeans, kmeans_plus, KMeansConfig};
use gsup_core::datagen::{gen_images, gen_mixture, gen_toy, ImageSimSpec, MixtureSpec};
use gsup_core::gammasup::{gamma_nonblurring, gamma_sup, gamma_sup_plus, GammaSupConfig};
use gsup_core::metrics::{c_impurity, impurity, purity_number};
use gsup_core::reduce::{pca_fit_project, MpcaModel};
use gsup_core::tuning::{default_tau_grid, scan_tau};
use gsup_core::{io, ClusterResult, DataMatrix, TuningParams};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "gsup", version, about = "Robust clustering via gamma-SUP")]
struct Cli {
    /// Bound the worker thread pool (outputs do not depend on this).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset.
    Simulate {
        #[command(subcommand)]
        kind: SimulateKind,
    },
    /// Cluster a data matrix.
    Cluster {
        #[command(subcommand)]
        method: ClusterMethod,
    },
    /// Scan a tau grid and report K(tau) with the detected transition.
    Scan(ScanArgs),
    /// Compare a predicted label file against a truth label file.
    Evaluate(EvaluateArgs),
    /// Reduce dimension with PCA or 2-mode MPCA.
    Reduce(ReduceArgs),
}

#[derive(Subcommand)]
enum SimulateKind {
    /// 4-component planar normal mixture.
    Mixture {
        #[arg(long)]
        c: f64,
        #[arg(long)]
        pi0: f64,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        labels_out: Option<PathBuf>,
    },
    /// 40-point toy set: two 10-point Gaussian clusters plus 20 noise points.
    Toy {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        labels_out: Option<PathBuf>,
    },
    /// Template images with noise and a misaligned (rotated) fraction.
    Images {
        #[arg(long, default_value_t = 16)]
        templates: usize,
        #[arg(long, default_value_t = 16)]
        side: usize,
        #[arg(long)]
        n: usize,
        /// Pixel noise standard deviation (exclusive with --snr).
        #[arg(long, conflicts_with = "snr")]
        sigma_eps: Option<f64>,
        /// Target SNR; sigma_eps is derived from the template bank variance.
        #[arg(long)]
        snr: Option<f64>,
        #[arg(long, default_value_t = 0.0)]
        misalign_frac: f64,
        /// Comma-separated clockwise rotation angles in degrees.
        #[arg(long, value_delimiter = ',', default_values_t = gsup_core::datagen::DEFAULT_ROTATIONS)]
        angles: Vec<f64>,
        #[arg(long)]
        seed: u64,
        /// Raw image-stack output (version-2 GSUP file).
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        labels_out: Option<PathBuf>,
        #[arg(long)]
        mask_out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct GsupFlags {
    /// Model parameter s.
    #[arg(long, default_value_t = 0.025, allow_negative_numbers = true)]
    s: f64,
    /// Scale parameter tau (data units).
    #[arg(long, allow_negative_numbers = true)]
    tau: f64,
    #[arg(long, default_value_t = gsup_core::gammasup::DEFAULT_CONV_EPS)]
    conv_eps: f64,
    #[arg(long, default_value_t = gsup_core::gammasup::DEFAULT_MERGE_EPS)]
    merge_eps: f64,
    #[arg(long, default_value_t = gsup_core::gammasup::DEFAULT_MAX_ITER)]
    max_iter: usize,
}

#[derive(Args)]
struct KmeansFlags {
    #[arg(long)]
    k: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = gsup_core::baselines::DEFAULT_N_INIT)]
    n_init: usize,
    #[arg(long, default_value_t = 300)]
    max_iter: usize,
}

#[derive(Args)]
struct OutFlags {
    /// Label output file.
    #[arg(long)]
    out: PathBuf,
    /// Cluster-center matrix output (csv).
    #[arg(long)]
    centers_out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum ClusterMethod {
    /// Blurring gamma-SUP.
    Gsup {
        data: PathBuf,
        #[command(flatten)]
        flags: GsupFlags,
        #[command(flatten)]
        out: OutFlags,
    },
    /// Nonblurring gamma-estimator.
    GsupNb {
        data: PathBuf,
        #[command(flatten)]
        flags: GsupFlags,
        #[command(flatten)]
        out: OutFlags,
    },
    /// gamma-SUP with 2-means post-splitting of oversized clusters.
    GsupPlus {
        data: PathBuf,
        #[command(flatten)]
        flags: GsupFlags,
        #[arg(long, default_value_t = 70)]
        size_threshold: usize,
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        out: OutFlags,
    },
    /// Lloyd k-means, best of --n-init restarts.
    Kmeans {
        data: PathBuf,
        #[command(flatten)]
        flags: KmeansFlags,
        #[command(flatten)]
        out: OutFlags,
    },
    /// Bisecting k-means with small-cluster dismissal.
    KmeansPlus {
        data: PathBuf,
        #[command(flatten)]
        flags: KmeansFlags,
        #[arg(long, default_value_t = gsup_core::baselines::DEFAULT_DISMISS)]
        dismiss_threshold: usize,
        #[command(flatten)]
        out: OutFlags,
    },
    /// Gap-statistic selection of K followed by k-means at the selected K.
    KmeansGap {
        data: PathBuf,
        #[arg(long)]
        k_max: usize,
        #[arg(long, default_value_t = 10)]
        b_refs: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = gsup_core::baselines::DEFAULT_N_INIT)]
        n_init: usize,
        #[command(flatten)]
        out: OutFlags,
    },
}

#[derive(Args)]
struct ScanArgs {
    data: PathBuf,
    #[arg(long, default_value_t = 0.025)]
    s: f64,
    /// Explicit comma-separated ascending tau grid.
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["tau_min", "tau_max", "tau_count"])]
    taus: Option<Vec<f64>>,
    #[arg(long, requires = "tau_max")]
    tau_min: Option<f64>,
    #[arg(long, requires = "tau_min")]
    tau_max: Option<f64>,
    /// Grid size for --tau-min/--tau-max or the automatic grid.
    #[arg(long, default_value_t = 40)]
    tau_count: usize,
    #[arg(long, default_value_t = gsup_core::gammasup::DEFAULT_CONV_EPS)]
    conv_eps: f64,
    #[arg(long, default_value_t = gsup_core::gammasup::DEFAULT_MERGE_EPS)]
    merge_eps: f64,
    #[arg(long, default_value_t = gsup_core::gammasup::DEFAULT_MAX_ITER)]
    max_iter: usize,
    /// Two-column (tau, K) csv output.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    truth: PathBuf,
    #[arg(long)]
    pred: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReduceMethod {
    Pca,
    Mpca,
}

#[derive(Args)]
struct ReduceArgs {
    data: PathBuf,
    #[arg(long, value_enum)]
    method: ReduceMethod,
    /// PCA target rank.
    #[arg(long)]
    rank: Option<usize>,
    /// Use the correlation matrix instead of the covariance (pca).
    #[arg(long, default_value_t = false)]
    correlation: bool,
    /// MPCA row-mode rank.
    #[arg(long)]
    r1: Option<usize>,
    /// MPCA column-mode rank.
    #[arg(long)]
    r2: Option<usize>,
    #[arg(long, default_value_t = 5)]
    sweeps: usize,
    #[arg(long)]
    out: PathBuf,
    /// Optional MPCA model dump.
    #[arg(long)]
    model_out: Option<PathBuf>,
}

fn usage_error(msg: &str) -> ! {
    eprintln!("error: {msg}");
    std::process::exit(2);
}

fn load_matrix(path: &PathBuf) -> gsup_core::Result<DataMatrix> {
    Ok(io::read_matrix_auto(path)?.0)
}

fn report_cluster(res: &ClusterResult, out: &OutFlags) -> gsup_core::Result<()> {
    let labels: Vec<i64> = res.labels.iter().map(|&l| l as i64).collect();
    io::write_labels(&out.out, &labels)?;
    if let Some(centers_path) = &out.centers_out {
        io::write_csv(centers_path, &res.centers)?;
    }
    println!("k={}", res.k());
    println!("iterations={}", res.iterations);
    println!("converged={}", res.converged);
    Ok(())
}

fn run(cli: Cli) -> gsup_core::Result<()> {
    match cli.command {
        Command::Simulate { kind } => match kind {
            SimulateKind::Mixture {
                c,
                pi0,
                n,
                seed,
                out,
                labels_out,
            } => {
                let spec = MixtureSpec { c, pi0, n, seed };
                let (data, labels) = gen_mixture(&spec)?;
                io::write_csv(&out, &data)?;
                if let Some(lp) = labels_out {
                    io::write_labels(&lp, &labels)?;
                }
                println!("kind=mixture c={c} pi0={pi0} n={n} seed={seed}");
            }
            SimulateKind::Toy {
                seed,
                out,
                labels_out,
            } => {
                let (data, labels) = gen_toy(seed);
                io::write_csv(&out, &data)?;
                if let Some(lp) = labels_out {
                    io::write_labels(&lp, &labels)?;
                }
                println!("kind=toy n=40 seed={seed}");
            }
            SimulateKind::Images {
                templates,
                side,
                n,
                sigma_eps,
                snr,
                misalign_frac,
                angles,
                seed,
                out,
                labels_out,
                mask_out,
            } => {
                let sigma_eps = match (sigma_eps, snr) {
                    (Some(s), None) => s,
                    (None, Some(target)) => {
                        if !(target > 0.0) {
                            usage_error("--snr must be > 0");
                        }
                        (gsup_core::datagen::template_bank_variance(templates, side) / target)
                            .sqrt()
                    }
                    _ => usage_error("exactly one of --sigma-eps or --snr is required"),
                };
                let spec = ImageSimSpec {
                    n_templates: templates,
                    image_side: side,
                    n_images: n,
                    sigma_eps,
                    misalign_frac,
                    rotation_angles: angles.clone(),
                    seed,
                };
                let sim = gen_images(&spec)?;
                io::write_raw(&out, &sim.data, Some((side, side)))?;
                if let Some(lp) = labels_out {
                    io::write_labels(&lp, &sim.labels)?;
                }
                if let Some(mp) = mask_out {
                    let mask: Vec<i64> = sim.misaligned.iter().map(|&m| m as i64).collect();
                    io::write_labels(&mp, &mask)?;
                }
                println!(
                    "kind=images templates={templates} side={side} n={n} sigma_eps={sigma_eps} \
                     misalign_frac={misalign_frac} seed={seed}"
                );
                println!("realized_snr={}", sim.realized_snr);
            }
        },
        Command::Cluster { method } => match method {
            ClusterMethod::Gsup { data, flags, out } => {
                let m = load_matrix(&data)?;
                let cfg = gsup_config(&flags)?;
                println!(
                    "method=gsup s={} tau={} conv_eps={} merge_eps={} max_iter={}",
                    flags.s, flags.tau, flags.conv_eps, flags.merge_eps, flags.max_iter
                );
                report_cluster(&gamma_sup(&m, &cfg)?, &out)?;
            }
            ClusterMethod::GsupNb { data, flags, out } => {
                let m = load_matrix(&data)?;
                let cfg = gsup_config(&flags)?;
                println!(
                    "method=gsup-nb s={} tau={} conv_eps={} merge_eps={} max_iter={}",
                    flags.s, flags.tau, flags.conv_eps, flags.merge_eps, flags.max_iter
                );
                report_cluster(&gamma_nonblurring(&m, &cfg)?, &out)?;
            }
            ClusterMethod::GsupPlus {
                data,
                flags,
                size_threshold,
                seed,
                out,
            } => {
                let m = load_matrix(&data)?;
                let cfg = gsup_config(&flags)?;
                println!(
                    "method=gsup-plus s={} tau={} conv_eps={} merge_eps={} max_iter={} \
                     size_threshold={size_threshold} seed={seed}",
                    flags.s, flags.tau, flags.conv_eps, flags.merge_eps, flags.max_iter
                );
                report_cluster(&gamma_sup_plus(&m, &cfg, size_threshold, seed)?, &out)?;
            }
            ClusterMethod::Kmeans { data, flags, out } => {
                let m = load_matrix(&data)?;
                let cfg = KMeansConfig::new(flags.k, flags.seed)
                    .with_n_init(flags.n_init)
                    .with_max_iter(flags.max_iter);
                println!(
                    "method=kmeans k={} seed={} n_init={} max_iter={}",
                    flags.k, flags.seed, flags.n_init, flags.max_iter
                );
                report_cluster(&kmeans(&m, &cfg)?, &out)?;
            }
            ClusterMethod::KmeansPlus {
                data,
                flags,
                dismiss_threshold,
                out,
            } => {
                let m = load_matrix(&data)?;
                let cfg = KMeansConfig::new(flags.k, flags.seed)
                    .with_n_init(flags.n_init)
                    .with_max_iter(flags.max_iter)
                    .with_dismiss_threshold(dismiss_threshold);
                println!(
                    "method=kmeans-plus k={} seed={} n_init={} max_iter={} dismiss_threshold={}",
                    flags.k, flags.seed, flags.n_init, flags.max_iter, dismiss_threshold
                );
                report_cluster(&kmeans_plus(&m, &cfg)?, &out)?;
            }
            ClusterMethod::KmeansGap {
                data,
                k_max,
                b_refs,
                seed,
                n_init,
                out,
            } => {
                let m = load_matrix(&data)?;
                let gap = gap_statistic(&m, k_max, b_refs, seed)?;
                let cfg = KMeansConfig::new(gap.selected_k, seed).with_n_init(n_init);
                println!(
                    "method=kmeans-gap k_max={k_max} b_refs={b_refs} seed={seed} n_init={n_init}"
                );
                println!("selected_k={}", gap.selected_k);
                report_cluster(&kmeans(&m, &cfg)?, &out)?;
            }
        },
        Command::Scan(args) => {
            let m = load_matrix(&args.data)?;
            let taus = match (&args.taus, args.tau_min, args.tau_max) {
                (Some(taus), _, _) => {
                    if taus.is_empty() {
                        usage_error("--taus must not be empty");
                    }
                    taus.clone()
                }
                (None, Some(lo), Some(hi)) => {
                    if !(lo > 0.0 && hi > lo) || args.tau_count < 2 {
                        usage_error("need 0 < tau-min < tau-max and tau-count >= 2");
                    }
                    let ratio = (hi / lo).ln();
                    (0..args.tau_count)
                        .map(|i| lo * (ratio * i as f64 / (args.tau_count - 1) as f64).exp())
                        .collect()
                }
                _ => default_tau_grid(&m, args.tau_count)?,
            };
            let cfg = GammaSupConfig::new(TuningParams::new(args.s, taus[0])?)
                .with_conv_eps(args.conv_eps)
                .with_merge_eps(args.merge_eps)
                .with_max_iter(args.max_iter);
            let res = scan_tau(&m, args.s, &taus, cfg)?;
            let mut table = DataMatrix::zeros(res.taus.len(), 2);
            for (i, (&tau, &k)) in res.taus.iter().zip(&res.counts).enumerate() {
                table.row_mut(i)[0] = tau;
                table.row_mut(i)[1] = k as f64;
            }
            io::write_csv(&args.out, &table)?;
            println!(
                "s={} grid_len={} conv_eps={} merge_eps={} max_iter={}",
                args.s,
                res.taus.len(),
                args.conv_eps,
                args.merge_eps,
                args.max_iter
            );
            match res.transition_tau {
                Some(t) => println!("transition_tau={t}"),
                None => println!("transition_tau=none"),
            }
            match res.plateau {
                Some((i, j, k)) => println!(
                    "plateau_k={k} plateau_tau_lo={} plateau_tau_hi={}",
                    res.taus[i], res.taus[j]
                ),
                None => println!("plateau_k=none"),
            }
            match res.recommended_tau {
                Some(t) => println!("recommended_tau={t}"),
                None => println!("recommended_tau=none"),
            }
        }
        Command::Evaluate(args) => {
            let truth = io::read_labels(&args.truth)?;
            let pred = io::read_labels(&args.pred)?;
            let purity = purity_number(&truth, &pred)?;
            println!("n={}", truth.len());
            println!("purity={purity}");
            println!("impurity={}", impurity(&truth, &pred)?);
            println!("c_impurity={}", c_impurity(&truth, &pred)?);
            let k = |v: &[i64]| v.iter().collect::<std::collections::HashSet<_>>().len();
            println!("k_true={}", k(&truth));
            println!("k_pred={}", k(&pred));
        }
        Command::Reduce(args) => {
            let (m, dims) = io::read_matrix_auto(&args.data)?;
            match args.method {
                ReduceMethod::Pca => {
                    let Some(rank) = args.rank else {
                        usage_error("--rank is required for pca");
                    };
                    let res = pca_fit_project(&m, rank, args.correlation)?;
                    io::write_csv(&args.out, &res.projected)?;
                    println!("method=pca rank={rank} correlation={}", args.correlation);
                    let ratios: Vec<String> =
                        res.explained_ratios.iter().map(|r| format!("{r:.6}")).collect();
                    println!("explained_ratios={}", ratios.join(","));
                }
                ReduceMethod::Mpca => {
                    let (Some(r1), Some(r2)) = (args.r1, args.r2) else {
                        usage_error("--r1 and --r2 are required for mpca");
                    };
                    let Some((d1, d2)) = dims else {
                        usage_error("mpca needs a version-2 raw image stack with side lengths");
                    };
                    let model = MpcaModel::fit(&m, d1, d2, r1, r2, args.sweeps)?;
                    let proj = model.project(&m)?;
                    io::write_csv(&args.out, &proj)?;
                    if let Some(mp) = &args.model_out {
                        io::write_mpca_model(mp, &model)?;
                    }
                    println!("method=mpca d1={d1} d2={d2} r1={r1} r2={r2} sweeps={}", args.sweeps);
                    println!(
                        "reconstruction_error={}",
                        model.reconstruction_error(&m)?
                    );
                }
            }
        }
    }
    Ok(())
}

fn gsup_config(flags: &GsupFlags) -> gsup_core::Result<GammaSupConfig> {
    // bad flag values are usage errors, not runtime failures
    if !(flags.s > 0.0) {
        usage_error("--s must be > 0");
    }
    if !(flags.tau > 0.0) {
        usage_error("--tau must be > 0");
    }
    if !(flags.conv_eps > 0.0) || flags.merge_eps < flags.conv_eps || flags.max_iter == 0 {
        usage_error("need conv-eps > 0, merge-eps >= conv-eps, max-iter >= 1");
    }
    Ok(GammaSupConfig::new(TuningParams::new(flags.s, flags.tau)?)
        .with_conv_eps(flags.conv_eps)
        .with_merge_eps(flags.merge_eps)
        .with_max_iter(flags.max_iter))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if threads == 0 {
            usage_error("--threads must be >= 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .ok();
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
