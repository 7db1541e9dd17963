use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use twoplanar::conll::{read_conll_file, write_conll};
use twoplanar::eval::{evaluate, paired_bootstrap, Metric};
use twoplanar::parser::{load_embeddings, load_model_file, save_model_file, Encoder, Regime, SystemId, TrainConfig};
use twoplanar::planarity::planarity_stats;
use twoplanar::verify::{oracle_verify, VerifyConfig};

#[derive(Parser)]
#[command(name = "twoplanar", version, about = "2-Planar dependency parser with a dynamic oracle")]
struct Cli {
    /// Print JSON lines instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SystemArg {
    #[value(name = "2planar")]
    TwoPlanar,
    #[value(name = "hybrid-swap")]
    HybridSwap,
}

impl From<SystemArg> for SystemId {
    fn from(s: SystemArg) -> SystemId {
        match s {
            SystemArg::TwoPlanar => SystemId::TwoPlanar,
            SystemArg::HybridSwap => SystemId::HybridSwap,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleArg {
    Static,
    Dynamic,
}

#[derive(Clone, Copy, ValueEnum)]
enum EncoderArg {
    None,
    Birnn,
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    Uas,
    Las,
}

#[derive(Args)]
struct Seed {
    #[arg(long, env = "PARSER_SEED", default_value_t = 1)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Train a model, printing dev UAS after every iteration.
    Train {
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        dev: PathBuf,
        #[arg(long, value_enum, default_value = "2planar")]
        system: SystemArg,
        #[arg(long, value_enum, default_value = "dynamic")]
        oracle: OracleArg,
        #[arg(long, default_value_t = 15)]
        iters: usize,
        #[command(flatten)]
        seed: Seed,
        #[arg(long)]
        model: PathBuf,
        /// Pretrained vectors, one "form v1 ... vd" per line.
        #[arg(long)]
        embeddings: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "none")]
        encoder: EncoderArg,
        #[arg(long)]
        learning_rate: Option<f32>,
        #[arg(long)]
        hidden: Option<usize>,
    },
    /// Parse a CoNLL file with a trained model.
    Parse {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// Print every transition with the resulting stacks and buffer.
        #[arg(long)]
        trace: bool,
    },
    /// Attachment scores of a prediction against gold.
    Eval {
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        exclude_punct: bool,
    },
    /// Paired bootstrap test that system A beats system B.
    Significance {
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        pred_a: PathBuf,
        #[arg(long)]
        pred_b: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[command(flatten)]
        seed: Seed,
        #[arg(long, value_enum, default_value = "uas")]
        metric: MetricArg,
        #[arg(long)]
        exclude_punct: bool,
    },
    /// Check the oracles against exhaustive search on random trees.
    OracleVerify {
        #[arg(long, default_value_t = 6)]
        max_len: usize,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[command(flatten)]
        seed: Seed,
        /// Both systems when omitted.
        #[arg(long, value_enum)]
        system: Option<SystemArg>,
        /// Gold trees rebuilt by zero-cost walks.
        #[arg(long, default_value_t = 1000)]
        reconstructions: usize,
    },
    /// 1-planar, 2-planar and other sentence rates of a treebank.
    PlanarityStats {
        #[arg(long)]
        input: PathBuf,
    },
}

fn read(path: &PathBuf) -> Result<Vec<twoplanar::conll::Sentence>> {
    read_conll_file(path).with_context(|| format!("reading {}", path.display()))
}

fn run(cli: Cli) -> Result<bool> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match cli.command {
        Command::Train {
            train,
            dev,
            system,
            oracle,
            iters,
            seed,
            model,
            embeddings,
            encoder,
            learning_rate,
            hidden,
        } => {
            let train_set = read(&train)?;
            let dev_set = read(&dev)?;
            let regime = match oracle {
                OracleArg::Static => Regime::Static,
                OracleArg::Dynamic => Regime::Dynamic,
            };
            let mut config = TrainConfig::new(system.into(), regime, iters, seed.seed);
            config.hyperparams.encoder = match encoder {
                EncoderArg::None => Encoder::None,
                EncoderArg::Birnn => Encoder::BiRnn,
            };
            if let Some(lr) = learning_rate {
                config.hyperparams.learning_rate = lr;
            }
            if let Some(h) = hidden {
                config.hyperparams.hidden = h;
            }
            if let Some(path) = embeddings {
                config.embeddings = Some(load_embeddings(&path).map_err(anyhow::Error::msg)?);
            }
            let json = cli.json;
            let mut write_err = None;
            let (trained, reports) = twoplanar::parser::train(&config, &train_set, &dev_set, &mut |r| {
                let line = if json {
                    serde_json::to_string(r).unwrap()
                } else {
                    format!("iteration {} dev UAS {:.2} loss {:.2}", r.iteration, r.dev_uas, r.loss)
                };
                if let Err(e) = writeln!(out, "{}", line).and_then(|_| out.flush()) {
                    write_err.get_or_insert(e);
                }
            })?;
            if let Some(e) = write_err {
                return Err(e.into());
            }
            save_model_file(&trained, &model).with_context(|| format!("writing {}", model.display()))?;
            let best = reports.iter().map(|r| r.dev_uas).fold(0.0, f64::max);
            if cli.json {
                writeln!(out, "{}", json!({"model": model.display().to_string(), "best_dev_uas": best}))?;
            } else {
                writeln!(out, "best dev UAS {:.2}, model written to {}", best, model.display())?;
            }
        }
        Command::Parse {
            model,
            input,
            output,
            trace,
        } => {
            let m = load_model_file(&model).with_context(|| format!("loading {}", model.display()))?;
            let sentences = read(&input)?;
            let mut parsed = Vec::with_capacity(sentences.len());
            for (i, s) in sentences.iter().enumerate() {
                if trace {
                    let mut lines = Vec::new();
                    parsed.push(m.parse_with_trace(s, Some(&mut |l: String| lines.push(l))));
                    for l in lines {
                        if cli.json {
                            writeln!(out, "{}", json!({"sentence": i + 1, "trace": l}))?;
                        } else {
                            writeln!(out, "{}", l)?;
                        }
                    }
                    if !cli.json {
                        writeln!(out)?;
                    }
                } else {
                    parsed.push(m.parse(s));
                }
            }
            let file = File::create(&output).with_context(|| format!("writing {}", output.display()))?;
            let mut w = BufWriter::new(file);
            write_conll(&mut w, &parsed)?;
            w.flush()?;
            if cli.json {
                writeln!(out, "{}", json!({"sentences": parsed.len(), "output": output.display().to_string()}))?;
            }
        }
        Command::Eval {
            gold,
            pred,
            exclude_punct,
        } => {
            let report = evaluate(&read(&pred)?, &read(&gold)?, exclude_punct)?;
            if cli.json {
                writeln!(out, "{}", serde_json::to_string(&report)?)?;
            } else {
                writeln!(out, "{}", report.to_text())?;
            }
        }
        Command::Significance {
            gold,
            pred_a,
            pred_b,
            samples,
            seed,
            metric,
            exclude_punct,
        } => {
            let metric = match metric {
                MetricArg::Uas => Metric::Uas,
                MetricArg::Las => Metric::Las,
            };
            let r = paired_bootstrap(
                &read(&gold)?,
                &read(&pred_a)?,
                &read(&pred_b)?,
                metric,
                exclude_punct,
                samples,
                seed.seed,
            )?;
            if cli.json {
                writeln!(out, "{}", serde_json::to_string(&r)?)?;
            } else {
                writeln!(
                    out,
                    "delta {:.2}\np_value {:.4}\nsamples {}\nseed {}",
                    r.delta, r.p_value, r.samples, r.seed
                )?;
            }
        }
        Command::OracleVerify {
            max_len,
            samples,
            seed,
            system,
            reconstructions,
        } => {
            let systems = match system {
                Some(s) => vec![SystemId::from(s)],
                None => vec![SystemId::TwoPlanar, SystemId::HybridSwap],
            };
            let mut ok = true;
            for system in systems {
                let mut config = VerifyConfig::new(system, max_len, samples, seed.seed);
                config.reconstructions = reconstructions;
                let report = oracle_verify(&config)?;
                if cli.json {
                    let mut v = serde_json::to_value(&report)?;
                    v["system"] = json!(system.to_string());
                    writeln!(out, "{}", v)?;
                } else {
                    writeln!(
                        out,
                        "{}: configurations {} transitions {} reconstructions {} failures {}",
                        system, report.configurations, report.transitions, report.reconstructions, report.failures
                    )?;
                    if let Some(trace) = &report.counterexample {
                        writeln!(out, "counterexample:\n{}", trace)?;
                    }
                }
                ok &= report.passed();
            }
            return Ok(ok);
        }
        Command::PlanarityStats { input } => {
            let sentences = read(&input)?;
            let mut graphs = Vec::with_capacity(sentences.len());
            for (i, s) in sentences.iter().enumerate() {
                graphs.push(s.graph().with_context(|| format!("sentence {}", i + 1))?);
            }
            let report = planarity_stats(&graphs);
            if cli.json {
                writeln!(out, "{}", report.to_json())?;
            } else {
                writeln!(out, "{}", report.to_text())?;
            }
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {:#}", e);
            ExitCode::from(1)
        }
    }
}
