//! Command-line front end wiring mesh generation, Reeb graphs, level-set
//! thickness, distortion measurement and certification into reproducible
//! runs. Reports embed the full run configuration; exit code 1 flags
//! validation errors, exit code 2 flags a violated inequality.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};
use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use reebkit::{
    audit_suite, betti, build_reeb, gen_sphere, gen_thickened_graph, gen_torus, graph_bound,
    height_field, make_excellent, measured_distortion, mesh_stats, theorem_bound, thickness,
    DiameterMode, PairBudget, ReebError, SamplingConfig, ScalarField, ThickenedGraphSpec, TriMesh,
    TorusOrientation,
};

#[derive(Parser)]
#[command(
    name = "reebkit",
    version,
    about = "Reeb graphs, level-set thickness, and certified distortion bounds for scalar fields on closed surfaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    knobs: Knobs,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize, PartialEq)]
struct Knobs {
    /// Edge-graph subdivision for geodesic sweeps.
    #[arg(long, global = true, default_value_t = 2)]
    subdivision: u32,
    /// Regular levels sampled per critical interval.
    #[arg(long, global = true, default_value_t = 8)]
    levels_per_interval: usize,
    /// Polyline samples per level-component diameter estimate.
    #[arg(long, global = true, default_value_t = 24)]
    diameter_samples: usize,
    /// Farthest-point landmarks for large-mesh diameters.
    #[arg(long, global = true, default_value_t = 64)]
    landmarks: usize,
    /// Vertex count up to which all-pairs sweeps stay exact.
    #[arg(long, global = true, default_value_t = 3000)]
    exact_pair_threshold: usize,
    /// Source count for sampled distortion on large meshes.
    #[arg(long, global = true, default_value_t = 256)]
    sampled_pairs: usize,
    /// Relative slack budget for audits of measured quantities.
    #[arg(long, global = true, default_value_t = 0.05)]
    audit_slack: f64,
    /// Seed for randomized audits.
    #[arg(long, global = true, default_value_t = 2026)]
    seed: u64,
    /// Perturbation sup-norm budget (relative to the value range) used to
    /// make field values pairwise distinct.
    #[arg(long, global = true, default_value_t = 1e-9)]
    excellent_epsilon: f64,
    /// Lipschitz increase budget for the same perturbation.
    #[arg(long, global = true, default_value_t = 1e-6)]
    excellent_delta: f64,
    /// Omit the timestamp so identical runs emit byte-identical files.
    #[arg(long, global = true)]
    no_timestamp: bool,
}

impl Knobs {
    fn sampling(&self) -> SamplingConfig {
        SamplingConfig {
            subdivision: self.subdivision,
            levels_per_interval: self.levels_per_interval,
            diameter_samples: self.diameter_samples,
            landmark_count: self.landmarks,
            exact_pair_threshold: self.exact_pair_threshold,
            sampled_pairs: self.sampled_pairs,
            audit_slack: self.audit_slack,
            seed: self.seed,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a mesh (OFF), a height-field sidecar and metadata.
    Generate {
        /// Thickened-graph spec (TOML).
        #[arg(long, conflicts_with_all = ["sphere", "torus"])]
        spec: Option<PathBuf>,
        /// Builtin sphere: "radius,refinements".
        #[arg(long, conflicts_with = "torus")]
        sphere: Option<String>,
        /// Builtin torus: "R,r,seg_major,seg_minor,standing|lying".
        #[arg(long)]
        torus: Option<String>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Basename for the emitted files.
        #[arg(long, default_value = "shape")]
        name: String,
    },
    /// Diameter, total measure and component count of a mesh.
    Stats {
        #[arg(long)]
        mesh: PathBuf,
        /// Force the exact all-pairs diameter.
        #[arg(long)]
        exact: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Betti numbers over the two-element field.
    Betti {
        #[arg(long)]
        mesh: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a field source and write it as a sidecar file.
    Field {
        #[arg(long)]
        mesh: PathBuf,
        /// "height:z", "height:x,y,z" or "distance:<vertex>".
        #[arg(long)]
        field: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build the Reeb graph; writes JSON and DOT exports.
    Reeb {
        #[arg(long)]
        mesh: PathBuf,
        #[arg(long)]
        field: String,
        /// Output prefix; writes <prefix>.reeb.json and <prefix>.reeb.dot.
        #[arg(long)]
        out: PathBuf,
    },
    /// Thickness sweep; writes a per-level CSV next to the JSON summary.
    Thickness {
        #[arg(long)]
        mesh: PathBuf,
        #[arg(long)]
        field: String,
        /// Output prefix; writes <prefix>.csv and <prefix>.json.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Measured metric distortion of the Reeb quotient map.
    Distortion {
        #[arg(long)]
        mesh: PathBuf,
        #[arg(long)]
        field: String,
        /// "exact", "auto", or a sampled source count.
        #[arg(long, default_value = "auto")]
        pairs: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Full certificate: ingredients, bound terms, measured distortion.
    /// Exits 2 when the measured distortion exceeds the bound.
    Bound {
        #[arg(long)]
        mesh: PathBuf,
        #[arg(long)]
        field: String,
        /// Base point: vertex index, "south" or "north".
        #[arg(long, default_value = "south")]
        p: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Randomized inequality audits. Exits 2 on any violation.
    Audit {
        #[arg(long)]
        mesh: PathBuf,
        #[arg(long)]
        field: String,
        #[arg(long, default_value = "south")]
        p: String,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        /// Fault-injection fixture: rescale graph distances by this factor
        /// before auditing. 1.0 means honest distances.
        #[arg(long, default_value_t = 1.0)]
        inject_df_error: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Reproducibility record embedded in every report.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
struct RunConfig {
    command: String,
    mesh: Option<String>,
    field: Option<String>,
    base_point: Option<String>,
    trials: Option<usize>,
    pairs: Option<String>,
    out: Option<String>,
    knobs: Knobs,
}

#[derive(Serialize)]
struct Document<T: Serialize> {
    schema: &'static str,
    run_config: RunConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    timestamp: Option<String>,
    payload: T,
}

fn timestamp(knobs: &Knobs) -> Option<String> {
    if knobs.no_timestamp {
        None
    } else {
        let secs = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Some(format!("{secs}"))
    }
}

/// Atomic write: temp file in the target directory, then rename.
fn write_atomic(path: &Path, contents: &str) -> anyhow::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    if let Some(d) = dir {
        std::fs::create_dir_all(d)?;
    }
    let tmp = path.with_extension("tmp~");
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

fn emit<T: Serialize>(doc: &Document<T>, out: Option<&Path>) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(doc)?;
    match out {
        Some(path) => write_atomic(path, &text)?,
        None => println!("{text}"),
    }
    Ok(())
}

fn load_field(
    mesh: Arc<TriMesh>,
    source: &str,
    knobs: &Knobs,
) -> anyhow::Result<ScalarField> {
    let raw = if let Some(axis) = source.strip_prefix("height:") {
        let axis = parse_axis(axis)?;
        height_field(mesh, axis)?
    } else if let Some(v) = source.strip_prefix("distance:") {
        let v: usize = v
            .parse()
            .map_err(|_| anyhow!("bad vertex index in '{source}'"))?;
        reebkit::distance_field(mesh, v, knobs.subdivision)?
    } else {
        let path = source.strip_prefix("sidecar:").unwrap_or(source);
        ScalarField::load_sidecar(mesh, path)?
    };
    if raw.distinct() {
        return Ok(raw);
    }
    let (lo, hi) = raw.range();
    let eps = knobs.excellent_epsilon * (hi - lo).max(1e-30);
    Ok(make_excellent(&raw, eps, knobs.excellent_delta)?)
}

fn parse_axis(text: &str) -> anyhow::Result<Vector3<f64>> {
    match text {
        "x" => return Ok(Vector3::x()),
        "y" => return Ok(Vector3::y()),
        "z" => return Ok(Vector3::z()),
        _ => {}
    }
    let parts: Vec<f64> = text
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| anyhow!("bad axis '{text}', expected x|y|z or three components"))?;
    if parts.len() != 3 {
        bail!("axis '{text}' needs exactly three components");
    }
    Ok(Vector3::new(parts[0], parts[1], parts[2]))
}

fn parse_base_point(mesh: &TriMesh, text: &str) -> anyhow::Result<usize> {
    match text {
        "south" => Ok((0..mesh.vertex_count())
            .min_by(|&a, &b| mesh.position(a).z.total_cmp(&mesh.position(b).z))
            .unwrap()),
        "north" => Ok((0..mesh.vertex_count())
            .max_by(|&a, &b| mesh.position(a).z.total_cmp(&mesh.position(b).z))
            .unwrap()),
        other => other
            .parse()
            .map_err(|_| anyhow!("base point must be a vertex index, 'south' or 'north'")),
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    let knobs = cli.knobs.clone();
    let cfg = knobs.sampling();
    let mut config = RunConfig {
        command: String::new(),
        mesh: None,
        field: None,
        base_point: None,
        trials: None,
        pairs: None,
        out: None,
        knobs: knobs.clone(),
    };

    match cli.command {
        Command::Generate {
            spec,
            sphere,
            torus,
            out,
            name,
        } => {
            config.command = "generate".into();
            config.out = Some(out.display().to_string());
            std::fs::create_dir_all(&out)?;
            let off_path = out.join(format!("{name}.off"));
            let field_path = out.join(format!("{name}.field"));
            let meta_path = out.join(format!("{name}.meta.json"));
            let meta;
            if let Some(spec_path) = spec {
                let text = std::fs::read_to_string(&spec_path)
                    .with_context(|| format!("reading {}", spec_path.display()))?;
                let spec = ThickenedGraphSpec::from_toml(&text)?;
                let g = gen_thickened_graph(&spec)?;
                g.mesh.write_off(&off_path)?;
                g.field.write_sidecar(&field_path)?;
                meta = serde_json::json!({
                    "kind": "thickened_graph",
                    "k_max": g.k_max,
                    "b1": g.b1,
                    "euler": g.mesh.euler_characteristic(),
                    "vertices": g.mesh.vertex_count(),
                    "triangles": g.mesh.triangle_count(),
                    "expected_thickness_lower_bound": graph_bound(2, g.k_max)?,
                });
            } else if let Some(sphere_params) = sphere {
                let parts: Vec<&str> = sphere_params.split(',').collect();
                if parts.len() != 2 {
                    bail!("--sphere needs 'radius,refinements'");
                }
                let radius: f64 = parts[0].trim().parse().context("sphere radius")?;
                let refinements: u32 = parts[1].trim().parse().context("sphere refinements")?;
                let mesh = gen_sphere(radius, refinements)?;
                mesh.write_off(&off_path)?;
                let arc = Arc::new(mesh);
                let f = height_field(arc.clone(), Vector3::z())?;
                f.write_sidecar(&field_path)?;
                let b = betti(&arc)?;
                meta = serde_json::json!({
                    "kind": "sphere",
                    "radius": radius,
                    "refinements": refinements,
                    "b1": b.b1,
                    "euler": b.euler,
                    "vertices": arc.vertex_count(),
                    "triangles": arc.triangle_count(),
                });
            } else if let Some(torus_params) = torus {
                let parts: Vec<&str> = torus_params.split(',').collect();
                if parts.len() != 5 {
                    bail!("--torus needs 'R,r,seg_major,seg_minor,standing|lying'");
                }
                let major: f64 = parts[0].trim().parse().context("torus R")?;
                let minor: f64 = parts[1].trim().parse().context("torus r")?;
                let sa: usize = parts[2].trim().parse().context("torus seg_major")?;
                let sb: usize = parts[3].trim().parse().context("torus seg_minor")?;
                let orientation = match parts[4].trim() {
                    "standing" => TorusOrientation::Standing,
                    "lying" => TorusOrientation::Lying,
                    other => bail!("unknown torus orientation '{other}'"),
                };
                let mesh = gen_torus(major, minor, sa, sb, orientation)?;
                mesh.write_off(&off_path)?;
                let arc = Arc::new(mesh);
                let f = height_field(arc.clone(), Vector3::z())?;
                f.write_sidecar(&field_path)?;
                let b = betti(&arc)?;
                meta = serde_json::json!({
                    "kind": "torus",
                    "orientation": parts[4].trim(),
                    "b1": b.b1,
                    "euler": b.euler,
                    "vertices": arc.vertex_count(),
                    "triangles": arc.triangle_count(),
                });
            } else {
                bail!("generate needs --spec, --sphere or --torus");
            }
            let doc = Document {
                schema: "reebkit-generate-v1",
                run_config: config,
                timestamp: timestamp(&knobs),
                payload: meta,
            };
            write_atomic(&meta_path, &serde_json::to_string_pretty(&doc)?)?;
            eprintln!(
                "wrote {}, {}, {}",
                off_path.display(),
                field_path.display(),
                meta_path.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Stats { mesh, exact, out } => {
            config.command = "stats".into();
            config.mesh = Some(mesh.display().to_string());
            config.out = out.as_ref().map(|p| p.display().to_string());
            let m = TriMesh::load_off(&mesh)?;
            let mode = if exact {
                DiameterMode::Exact
            } else {
                DiameterMode::auto(&m, &cfg)
            };
            let stats = mesh_stats(&m, mode, cfg.subdivision)?;
            let doc = Document {
                schema: "reebkit-stats-v1",
                run_config: config,
                timestamp: timestamp(&knobs),
                payload: stats,
            };
            emit(&doc, out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Betti { mesh, out } => {
            config.command = "betti".into();
            config.mesh = Some(mesh.display().to_string());
            let m = TriMesh::load_off(&mesh)?;
            let doc = Document {
                schema: "reebkit-betti-v1",
                run_config: config,
                timestamp: timestamp(&knobs),
                payload: betti(&m)?,
            };
            emit(&doc, out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Field { mesh, field, out } => {
            config.command = "field".into();
            config.mesh = Some(mesh.display().to_string());
            config.field = Some(field.clone());
            let m = Arc::new(TriMesh::load_off(&mesh)?);
            if !(field.starts_with("height:") || field.starts_with("distance:")) {
                bail!("field generation needs 'height:<axis>' or 'distance:<vertex>'");
            }
            let f = load_field(m, &field, &knobs)?;
            f.write_sidecar(&out)?;
            eprintln!("wrote {}", out.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Reeb { mesh, field, out } => {
            config.command = "reeb".into();
            config.mesh = Some(mesh.display().to_string());
            config.field = Some(field.clone());
            config.out = Some(out.display().to_string());
            let m = Arc::new(TriMesh::load_off(&mesh)?);
            let f = load_field(m, &field, &knobs)?;
            let (graph, quotient) = build_reeb(&f)?;
            let json_path = out.with_extension("reeb.json");
            let dot_path = out.with_extension("reeb.dot");
            let doc = Document {
                schema: "reebkit-reeb-v1",
                run_config: config,
                timestamp: timestamp(&knobs),
                payload: graph.export(&quotient),
            };
            write_atomic(&json_path, &serde_json::to_string_pretty(&doc)?)?;
            write_atomic(&dot_path, &graph.to_dot())?;
            eprintln!("wrote {}, {}", json_path.display(), dot_path.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Thickness { mesh, field, out } => {
            config.command = "thickness".into();
            config.mesh = Some(mesh.display().to_string());
            config.field = Some(field.clone());
            config.out = out.as_ref().map(|p| p.display().to_string());
            let m = Arc::new(TriMesh::load_off(&mesh)?);
            let f = load_field(m, &field, &knobs)?;
            let report = thickness(&f, &cfg)?;
            if let Some(prefix) = &out {
                write_atomic(&prefix.with_extension("csv"), &report.to_csv())?;
            }
            let doc = Document {
                schema: "reebkit-thickness-v1",
                run_config: config,
                timestamp: timestamp(&knobs),
                payload: &report,
            };
            emit(&doc, out.as_ref().map(|p| p.with_extension("json")).as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Distortion {
            mesh,
            field,
            pairs,
            out,
        } => {
            config.command = "distortion".into();
            config.mesh = Some(mesh.display().to_string());
            config.field = Some(field.clone());
            config.pairs = Some(pairs.clone());
            let m = Arc::new(TriMesh::load_off(&mesh)?);
            let f = load_field(m.clone(), &field, &knobs)?;
            let (graph, quotient) = build_reeb(&f)?;
            let budget = match pairs.as_str() {
                "exact" => PairBudget::Exact,
                "auto" => PairBudget::auto(m.vertex_count(), &cfg),
                n => PairBudget::Sampled {
                    count: n
                        .parse()
                        .map_err(|_| anyhow!("--pairs must be 'exact', 'auto' or a count"))?,
                },
            };
            let report = measured_distortion(&f, &graph, &quotient, budget, cfg.subdivision)?;
            let doc = Document {
                schema: "reebkit-distortion-v1",
                run_config: config,
                timestamp: timestamp(&knobs),
                payload: report,
            };
            emit(&doc, out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Bound {
            mesh,
            field,
            p,
            out,
        } => {
            config.command = "bound".into();
            config.mesh = Some(mesh.display().to_string());
            config.field = Some(field.clone());
            config.base_point = Some(p.clone());
            config.out = out.as_ref().map(|x| x.display().to_string());
            let m = Arc::new(TriMesh::load_off(&mesh)?);
            let f = load_field(m.clone(), &field, &knobs)?;
            let base = parse_base_point(&m, &p)?;
            let report = theorem_bound(&f, base, &cfg)?;
            let certified = report.certified;
            let doc = Document {
                schema: "reebkit-report-v1",
                run_config: config,
                timestamp: timestamp(&knobs),
                payload: report,
            };
            emit(&doc, out.as_deref())?;
            if certified {
                Ok(ExitCode::SUCCESS)
            } else {
                eprintln!("certification failure: measured distortion exceeds the bound");
                Ok(ExitCode::from(2))
            }
        }
        Command::Audit {
            mesh,
            field,
            p,
            trials,
            inject_df_error,
            out,
        } => {
            config.command = "audit".into();
            config.mesh = Some(mesh.display().to_string());
            config.field = Some(field.clone());
            config.base_point = Some(p.clone());
            config.trials = Some(trials);
            let m = Arc::new(TriMesh::load_off(&mesh)?);
            let f = load_field(m.clone(), &field, &knobs)?;
            let base = parse_base_point(&m, &p)?;
            let report = audit_suite(&f, base, trials, &cfg, inject_df_error)?;
            let passed = report.passed;
            let doc = Document {
                schema: "reebkit-audit-v1",
                run_config: config,
                timestamp: timestamp(&knobs),
                payload: report,
            };
            emit(&doc, out.as_deref())?;
            if passed {
                Ok(ExitCode::SUCCESS)
            } else {
                eprintln!("audit failure: at least one inequality violated beyond slack");
                Ok(ExitCode::from(2))
            }
        }
    }
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("REEBKIT_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            // validation errors and IO problems exit 1
            let _ = err.downcast_ref::<ReebError>();
            ExitCode::FAILURE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn run_config_round_trips() {
        let knobs = Knobs {
            subdivision: 2,
            levels_per_interval: 8,
            diameter_samples: 24,
            landmarks: 64,
            exact_pair_threshold: 3000,
            sampled_pairs: 256,
            audit_slack: 0.05,
            seed: 2026,
            excellent_epsilon: 1e-9,
            excellent_delta: 1e-6,
            no_timestamp: true,
        };
        let config = RunConfig {
            command: "bound".into(),
            mesh: Some("sphere.off".into()),
            field: Some("height:z".into()),
            base_point: Some("south".into()),
            trials: None,
            pairs: None,
            out: None,
            knobs,
        };
        let text = serde_json::to_string(&config).unwrap();
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(config, back);
    }

    #[test]
    fn axis_parsing() {
        assert_eq!(parse_axis("z").unwrap(), Vector3::z());
        assert_eq!(parse_axis("0,1,0").unwrap(), Vector3::y());
        assert!(parse_axis("1,2").is_err());
    }
}
