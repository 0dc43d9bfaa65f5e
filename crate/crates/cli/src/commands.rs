//! Subcommand implementations.

use serde_json::json;

use stablecluster::{
    fig2, fig3, gen_coverage, gen_resilient, naive_single_linkage_at_k,
    optimal_clustering_bruteforce, perturb, single_linkage_tree, solve_with_tree, stability_report,
    CenterPolicy, Clustering, Instance, Objective, ObjectiveKind, PerturbMode, PerturbationSpec,
    ProbeOptions, ResilientParams, DEFAULT_PARTITION_BUDGET, DEFAULT_SUBSET_BUDGET,
};

use crate::args::{
    BenchArgs, CentersArg, CheckArgs, CompareArgs, FormatArg, GenCoverageArgs, GenFig2Args,
    GenFig3Args, GenResilientArgs, GenerateCmd, ModeArg, ObjArg, OracleArgs, PerturbArgs,
    SolveArgs,
};
use crate::fileio::{
    budget_or_env, emit, load_clustering, load_instance, write_atomic, CliError, CliResult,
};
use crate::sweep::{fit_exponent, scaling_sweep};

fn objective_of(arg: ObjArg) -> Objective {
    Objective::new(match arg {
        ObjArg::Kmedian => ObjectiveKind::KMedian,
        ObjArg::Kmeans => ObjectiveKind::KMeans,
        ObjArg::Kcenter => ObjectiveKind::KCenter,
    })
}

fn apply_centers(inst: Instance, centers: Option<CentersArg>) -> CliResult<Instance> {
    match centers {
        None => Ok(inst),
        Some(CentersArg::Data) => Ok(inst.with_center_policy(CenterPolicy::DataPointsOnly)?),
        Some(CentersArg::Steiner) => Ok(inst.with_center_policy(CenterPolicy::SteinerCentroid)?),
    }
}

pub fn cmd_solve(args: &SolveArgs) -> CliResult<()> {
    let inst = apply_centers(load_instance(&args.instance)?, args.centers)?;
    let obj = objective_of(args.objective);
    let tree = single_linkage_tree(&inst);
    if let Some(path) = &args.dump_tree {
        write_atomic(path, &tree.dump_json())?;
    }
    let clustering = solve_with_tree(&tree, &inst, &obj, args.k)?;
    write_atomic(&args.out, &clustering.to_json())?;
    Ok(())
}

pub fn cmd_oracle(args: &OracleArgs) -> CliResult<()> {
    let inst = apply_centers(load_instance(&args.instance)?, args.centers)?;
    let obj = objective_of(args.objective);
    let budget = budget_or_env(args.budget, DEFAULT_PARTITION_BUDGET)?;
    let sol = optimal_clustering_bruteforce(&inst, &obj, args.k, budget)?;
    let mut value: serde_json::Value =
        serde_json::from_str(&sol.clustering.to_json()).expect("clustering json is valid");
    value["unique"] = json!(sol.unique);
    value["near_tie"] = json!(sol.near_tie);
    let text = serde_json::to_string_pretty(&value).expect("json");
    emit(&args.out, &text)
}

pub fn cmd_check(args: &CheckArgs) -> CliResult<()> {
    let inst = load_instance(&args.instance)?;
    let file_clustering = load_clustering(&args.clustering)?;
    // canonical centers and cost come from the labels; a divergent recorded
    // cost is reported but not fatal
    let clustering = Clustering::from_labels(
        &inst,
        file_clustering.labels.clone(),
        &file_clustering.objective,
    )?;
    let rel = (file_clustering.total_cost - clustering.total_cost).abs()
        / clustering.total_cost.abs().max(1.0);
    if rel > 1e-9 {
        eprintln!(
            "note: recorded cost {} differs from recomputed {}; using the recomputed clustering",
            file_clustering.total_cost, clustering.total_cost
        );
    }
    if let Some(path) = &args.dump_tree {
        write_atomic(path, &single_linkage_tree(&inst).dump_json())?;
    }
    let subset_budget = budget_or_env(args.exact_budget, DEFAULT_SUBSET_BUDGET)?;
    let probe_opts = ProbeOptions {
        allow_tree_solver: args.probe_with_solver,
        partition_budget: budget_or_env(None, DEFAULT_PARTITION_BUDGET)?,
        ..ProbeOptions::default()
    };
    let report = stability_report(
        &inst,
        &clustering,
        args.alpha,
        subset_budget,
        Some((args.trials, args.seed, &probe_opts)),
    )?;
    let text = serde_json::to_string_pretty(&report).expect("report json");
    emit(&args.out, &text)
}

fn parse_index_list(text: &str) -> CliResult<Vec<usize>> {
    text.split(',')
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|e| CliError::io(format!("index list entry {s:?}: {e}")))
        })
        .collect()
}

fn parse_pair_list(text: &str) -> CliResult<Vec<(usize, usize)>> {
    text.split(',')
        .filter(|s| !s.is_empty())
        .map(|s| {
            let (a, b) = s
                .trim()
                .split_once('-')
                .ok_or_else(|| CliError::io(format!("pair {s:?} is not of the form i-j")))?;
            let i = a
                .parse::<usize>()
                .map_err(|e| CliError::io(format!("pair {s:?}: {e}")))?;
            let j = b
                .parse::<usize>()
                .map_err(|e| CliError::io(format!("pair {s:?}: {e}")))?;
            Ok((i, j))
        })
        .collect()
}

pub fn cmd_perturb(args: &PerturbArgs) -> CliResult<()> {
    let inst = load_instance(&args.instance)?;
    let mode = match args.mode {
        ModeArg::Uniform => PerturbMode::RandomUniform,
        ModeArg::Blowup => {
            let members = args
                .members
                .as_deref()
                .ok_or_else(|| CliError::domain("--mode blowup needs --members"))?;
            PerturbMode::WithinClusterBlowup {
                members: parse_index_list(members)?,
            }
        }
        ModeArg::Mask => {
            let pairs = args
                .pairs
                .as_deref()
                .ok_or_else(|| CliError::domain("--mode mask needs --pairs"))?;
            PerturbMode::CustomMask {
                pairs: parse_pair_list(pairs)?,
            }
        }
    };
    let spec = PerturbationSpec {
        alpha: args.alpha,
        mode,
        seed: args.seed,
    };
    let perturbed = perturb(&inst, &spec)?;
    write_atomic(&args.out, &perturbed.to_json())
}

pub fn cmd_generate(cmd: &GenerateCmd) -> CliResult<()> {
    match cmd {
        GenerateCmd::Fig2(GenFig2Args { out }) => write_atomic(out, &fig2().to_json()),
        GenerateCmd::Fig3(GenFig3Args {
            size_big,
            size_small,
            eps,
            out,
        }) => {
            let inst = fig3(*size_big, *size_small, *eps)?;
            write_atomic(out, &inst.to_json())
        }
        GenerateCmd::Resilient(GenResilientArgs {
            n,
            k,
            target,
            centers,
            seed,
            out,
            out_clustering,
        }) => {
            let policy = match centers {
                CentersArg::Data => CenterPolicy::DataPointsOnly,
                CentersArg::Steiner => CenterPolicy::SteinerCentroid,
            };
            let params = ResilientParams::new(*n, *k, *target, policy, *seed);
            let generated = gen_resilient(&params)?;
            write_atomic(out, &generated.instance.to_json())?;
            if let Some(path) = out_clustering {
                write_atomic(path, &generated.intended.to_json())?;
            }
            eprintln!(
                "generated {} with proximity factor {:.4}",
                generated.instance.name(),
                generated.factor
            );
            Ok(())
        }
        GenerateCmd::Coverage(GenCoverageArgs { sets, k, out }) => {
            let text = std::fs::read_to_string(sets)
                .map_err(|e| CliError::io(format!("reading {sets}: {e}")))?;
            let (set_list, universe) = parse_set_system(&text)?;
            let inst = gen_coverage(&set_list, universe, *k)?;
            write_atomic(out, &inst.to_json())
        }
    }
}

/// Set-system format: first line "m u", then m lines of space-separated
/// element ids in [0, u).
fn parse_set_system(text: &str) -> CliResult<(Vec<Vec<usize>>, usize)> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| CliError::io("set-system file is empty"))?;
    let mut parts = header.split_whitespace();
    let m: usize = parts
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| CliError::io("set-system header must be \"m u\""))?;
    let u: usize = parts
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| CliError::io("set-system header must be \"m u\""))?;
    let mut sets = Vec::with_capacity(m);
    for _ in 0..m {
        let line = lines
            .next()
            .ok_or_else(|| CliError::io(format!("set-system file ended before {m} sets")))?;
        let ids: Result<Vec<usize>, _> = line.split_whitespace().map(str::parse).collect();
        sets.push(ids.map_err(|e| CliError::io(format!("set line {line:?}: {e}")))?);
    }
    Ok((sets, u))
}

pub fn cmd_compare(args: &CompareArgs) -> CliResult<()> {
    let inst = apply_centers(load_instance(&args.instance)?, args.centers)?;
    let obj = objective_of(args.objective);
    let tree = single_linkage_tree(&inst);
    let tree_sol = solve_with_tree(&tree, &inst, &obj, args.k)?;
    let naive_labels = naive_single_linkage_at_k(&inst, args.k)?;
    let naive_sol = Clustering::from_labels(&inst, naive_labels, &obj)?;
    let oracle_sol = if args.no_oracle {
        None
    } else {
        let budget = budget_or_env(args.budget, DEFAULT_PARTITION_BUDGET)?;
        Some(optimal_clustering_bruteforce(&inst, &obj, args.k, budget)?)
    };

    struct Row {
        method: &'static str,
        cost: f64,
        matches_oracle: Option<bool>,
    }
    let matches = |c: &Clustering| oracle_sol.as_ref().map(|o| c.same_partition(&o.clustering));
    let mut rows = vec![
        Row {
            method: "tree_dp",
            cost: tree_sol.total_cost,
            matches_oracle: matches(&tree_sol),
        },
        Row {
            method: "naive_single_linkage_at_k",
            cost: naive_sol.total_cost,
            matches_oracle: matches(&naive_sol),
        },
    ];
    if let Some(o) = &oracle_sol {
        rows.push(Row {
            method: "oracle",
            cost: o.clustering.total_cost,
            matches_oracle: Some(true),
        });
    }

    let text = match args.format {
        FormatArg::Tsv => {
            let mut out = String::from("method\tcost\tmatches_oracle\n");
            for r in &rows {
                let m = r.matches_oracle.map_or("-".to_string(), |b| b.to_string());
                out.push_str(&format!("{}\t{}\t{}\n", r.method, r.cost, m));
            }
            out
        }
        FormatArg::Json => {
            let rows: Vec<serde_json::Value> = rows
                .iter()
                .map(|r| {
                    json!({
                        "method": r.method,
                        "cost": r.cost,
                        "matches_oracle": r.matches_oracle,
                    })
                })
                .collect();
            serde_json::to_string_pretty(&json!({ "rows": rows })).expect("json")
        }
    };
    emit(&args.out, text.trim_end())
}

pub fn cmd_bench(args: &BenchArgs) -> CliResult<()> {
    let sizes = parse_index_list(&args.sizes)?;
    if sizes.is_empty() {
        return Err(CliError::domain("--sizes must name at least one size"));
    }
    let obj = objective_of(args.objective);
    let points = scaling_sweep(&sizes, args.k, &obj, args.seed, args.reps);
    let exponent = fit_exponent(&points);
    if let Some(path) = &args.dump_tree {
        let largest = *sizes.iter().max().expect("nonempty");
        let inst = crate::sweep::random_instance(largest, args.seed);
        write_atomic(path, &single_linkage_tree(&inst).dump_json())?;
    }
    let text = match args.format {
        FormatArg::Tsv => {
            let mut out = String::from("n\tseconds\n");
            for p in &points {
                out.push_str(&format!("{}\t{:.6}\n", p.n, p.seconds));
            }
            match exponent {
                Some(e) => out.push_str(&format!("# fitted_exponent\t{e:.3}\n")),
                None => out.push_str("# fitted_exponent\t-\n"),
            }
            out
        }
        FormatArg::Json => {
            let rows: Vec<serde_json::Value> = points
                .iter()
                .map(|p| json!({"n": p.n, "seconds": p.seconds}))
                .collect();
            serde_json::to_string_pretty(&json!({
                "rows": rows,
                "fitted_exponent": exponent,
            }))
            .expect("json")
        }
    };
    emit(&args.out, text.trim_end())
}
