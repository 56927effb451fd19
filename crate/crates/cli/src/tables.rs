//! Designs and text layouts for the `replicate-table` command. Table ids
//! follow the published simulation study: 2 bandwidth comparison, 3 jackknife
//! comparison, 4/5 balanced panels, 6/7 unbalanced pattern 1, 8 unbalanced
//! pattern 2, 9 Wald sizes, 12 the dynamic linear model appendix.

use crate::CliResult;
use std::fmt::Write as _;
use twofe::sim::{
    run_monte_carlo, DgpConfig, DgpKind, EstimatorKind, McConfig, McSummary, ParamStats, Pattern,
};

const BALANCED_T: [usize; 5] = [10, 15, 20, 25, 30];
/// (N1, N2) pairs giving average spans 15, 20, 25 with T1=10, T2=30.
const UNBALANCED_N: [(usize, usize); 3] = [(300, 100), (150, 150), (60, 180)];

fn balanced(t: usize) -> DgpConfig {
    DgpConfig::balanced(DgpKind::DynamicProbit, 200, t)
}

fn unbalanced(pattern: Pattern, n1: usize, n2: usize) -> DgpConfig {
    DgpConfig::unbalanced(DgpKind::DynamicProbit, pattern, n1, n2, 10, 30)
}

fn run(dgp: DgpConfig, ests: Vec<EstimatorKind>, reps: usize, seed: u64) -> McSummary {
    run_monte_carlo(&McConfig::new(dgp, ests, reps, seed))
}

fn header(out: &mut String, title: &str, reps: usize) {
    let _ = writeln!(out, "{title}");
    let _ = writeln!(
        out,
        "(bias, SD, RMSE in percent relative to the truth; {reps} replications)"
    );
    let _ = writeln!(out);
}

fn five_stats(out: &mut String, label: &str, coef: Option<&ParamStats>, ape: Option<&ParamStats>) {
    let cell = |s: Option<&ParamStats>| match s {
        Some(s) => format!(
            "{:8.2} {:7.2} {:7.2} {:6.2} {:5.2}",
            s.bias_pct, s.sd_pct, s.rmse_pct, s.se_sd, s.cp95
        ),
        None => format!("{:8} {:7} {:7} {:6} {:5}", "-", "-", "-", "-", "-"),
    };
    let _ = writeln!(out, "{label:10} {}   {}", cell(coef), cell(ape));
}

fn five_stats_header(out: &mut String) {
    let _ = writeln!(
        out,
        "{:10} {:>8} {:>7} {:>7} {:>6} {:>5}   {:>8} {:>7} {:>7} {:>6} {:>5}",
        "", "Bias", "SD", "RMSE", "SE/SD", "CP.95", "Bias", "SD", "RMSE", "SE/SD", "CP.95"
    );
    let _ = writeln!(
        out,
        "{:10} {:-^37}   {:-^37}",
        "", " Coefficients ", " Average Partial Effects "
    );
}

/// Tables 4-8 share one layout; `param` selects the lagged dependent variable
/// (0) or the exogenous regressor (1).
fn properties_table(
    title: &str,
    designs: Vec<(String, DgpConfig)>,
    param: usize,
    reps: usize,
    seed: u64,
) -> String {
    let ests = vec![
        EstimatorKind::Mle,
        EstimatorKind::Abc1(1),
        EstimatorKind::Abc1(2),
        EstimatorKind::Spj1,
        EstimatorKind::Lpm(1),
        EstimatorKind::Lpm(2),
    ];
    let mut out = String::new();
    header(&mut out, title, reps);
    for (name, dgp) in designs {
        let s = run(dgp, ests.clone(), reps, seed);
        let _ = writeln!(&mut out, "== {name} ==");
        five_stats_header(&mut out);
        for e in &s.estimators {
            let lpm = e.label.starts_with("LPM");
            five_stats(
                &mut out,
                &e.label,
                if lpm { None } else { Some(&e.coef[param]) },
                Some(&e.ape[param]),
            );
        }
        let _ = writeln!(&mut out);
    }
    out
}

fn balanced_designs() -> Vec<(String, DgpConfig)> {
    BALANCED_T
        .iter()
        .map(|&t| (format!("N = 200; T = {t}"), balanced(t)))
        .collect()
}

fn unbalanced_designs(pattern: Pattern) -> Vec<(String, DgpConfig)> {
    UNBALANCED_N
        .iter()
        .zip([15, 20, 25])
        .map(|(&(n1, n2), tbar)| {
            (
                format!("Nbar = 200; Tbar = {tbar}"),
                unbalanced(pattern, n1, n2),
            )
        })
        .collect()
}

fn table_bandwidths(reps: usize, seed: u64) -> String {
    let ls = [1usize, 2, 3, 4];
    let mut ests = Vec::new();
    for &l in &ls {
        ests.push(EstimatorKind::Abc1(l));
    }
    for &l in &ls {
        ests.push(EstimatorKind::Abc2(l));
    }
    for &l in &ls {
        ests.push(EstimatorKind::Abc3(l));
    }
    for &l in &ls {
        ests.push(EstimatorKind::Abc4(l));
    }
    let mut out = String::new();
    header(
        &mut out,
        "Table 2: Analytical Bias Corrections and Bandwidth Parameters",
        reps,
    );
    for t in [10usize, 20, 30] {
        let s = run(balanced(t), ests.clone(), reps, seed);
        let _ = writeln!(&mut out, "== N = 200; T = {t} ==");
        let _ = writeln!(
            &mut out,
            "{:6} {:>28}   {:>28}",
            "", "Coefficients (bias %)", "APEs (bias %)"
        );
        let _ = writeln!(
            &mut out,
            "{:6} {:>6} {:>6} {:>6} {:>6}   {:>6} {:>6} {:>6} {:>6}",
            "", "L=1", "L=2", "L=3", "L=4", "L=1", "L=2", "L=3", "L=4"
        );
        for (param, pname) in [(0, "Lagged Dependent Variable"), (1, "Exogenous Regressor")] {
            let _ = writeln!(&mut out, "-- {pname} --");
            for (vi, vname) in ["ABC1", "ABC2", "ABC3", "ABC4"].iter().enumerate() {
                let mut row = format!("{vname:6}");
                for li in 0..4 {
                    let e = &s.estimators[vi * 4 + li];
                    let _ = write!(row, " {:6.2}", e.coef[param].bias_pct);
                }
                let _ = write!(row, "  ");
                for li in 0..4 {
                    let e = &s.estimators[vi * 4 + li];
                    let _ = write!(row, " {:6.2}", e.ape[param].bias_pct);
                }
                let _ = writeln!(&mut out, "{row}");
            }
        }
        let _ = writeln!(&mut out);
    }
    out
}

fn table_jackknife(reps: usize, seed: u64) -> String {
    let ests = vec![EstimatorKind::Spj1, EstimatorKind::Spj2];
    let mut out = String::new();
    header(
        &mut out,
        "Table 3: Split-Panel Jackknife Bias Corrections",
        reps,
    );
    let _ = writeln!(
        &mut out,
        "{:22} {:>24}   {:>24}",
        "", "Coefficients", "Average Partial Effects"
    );
    let _ = writeln!(
        &mut out,
        "{:22} {:>5} {:>6} {:>5} {:>6}   {:>5} {:>6} {:>5} {:>6}",
        "", "SPJ1", "(SD)", "SPJ2", "(SD)", "SPJ1", "(SD)", "SPJ2", "(SD)"
    );
    for (param, pname) in [(0, "Lagged Dependent Variable"), (1, "Exogenous Regressor")] {
        let _ = writeln!(&mut out, "-- {pname} --");
        for &t in &BALANCED_T {
            let s = run(balanced(t), ests.clone(), reps, seed);
            let (s1, s2) = (&s.estimators[0], &s.estimators[1]);
            let _ = writeln!(
                &mut out,
                "N = 200; T = {t:2}        {:5.2} {:6.2} {:5.2} {:6.2}   {:5.2} {:6.2} {:5.2} {:6.2}",
                s1.coef[param].bias_pct,
                s1.coef[param].sd_pct,
                s2.coef[param].bias_pct,
                s2.coef[param].sd_pct,
                s1.ape[param].bias_pct,
                s1.ape[param].sd_pct,
                s2.ape[param].bias_pct,
                s2.ape[param].sd_pct,
            );
        }
    }
    out
}

fn table_wald(reps: usize, seed: u64) -> String {
    let ests = vec![
        EstimatorKind::Mle,
        EstimatorKind::Abc1(1),
        EstimatorKind::Abc1(2),
        EstimatorKind::Spj1,
    ];
    let mut out = String::new();
    header(
        &mut out,
        "Table 9: Sizes of different Wald Tests (H0: rho = 0.5 and beta = 1)",
        reps,
    );
    let _ = writeln!(
        &mut out,
        "{:28} {:>6} {:>9} {:>9} {:>6}",
        "", "MLE", "ABC1(L=1)", "ABC1(L=2)", "SPJ1"
    );
    let section = |out: &mut String, name: &str, designs: Vec<(String, DgpConfig)>| {
        let _ = writeln!(out, "-- {name} --");
        for (dname, dgp) in designs {
            let s = run(dgp, ests.clone(), reps, seed);
            let size = |i: usize| s.estimators[i].wald_size.unwrap_or(f64::NAN);
            let _ = writeln!(
                out,
                "{dname:28} {:6.2} {:9.2} {:9.2} {:6.2}",
                size(0),
                size(1),
                size(2),
                size(3)
            );
        }
    };
    section(&mut out, "Balanced", balanced_designs());
    section(
        &mut out,
        "Unbalanced 1",
        unbalanced_designs(Pattern::Pattern1),
    );
    section(
        &mut out,
        "Unbalanced 2",
        unbalanced_designs(Pattern::Pattern2),
    );
    out
}

fn table_linear(reps: usize, seed: u64) -> String {
    let ests = vec![
        EstimatorKind::Lpm(0),
        EstimatorKind::Lpm(1),
        EstimatorKind::Lpm(2),
    ];
    let mut out = String::new();
    header(
        &mut out,
        "Table 12: Finite Sample Properties - Balanced - Dynamic Linear Model",
        reps,
    );
    for &t in &BALANCED_T {
        let dgp = DgpConfig::balanced(DgpKind::DynamicLinear, 200, t);
        let s = run(dgp, ests.clone(), reps, seed);
        let _ = writeln!(&mut out, "== N = 200; T = {t} ==");
        let _ = writeln!(
            &mut out,
            "{:10} {:>37}   {:>37}",
            "", "Coefficients (rho)", "Coefficients (beta)"
        );
        let _ = writeln!(
            &mut out,
            "{:10} {:>8} {:>7} {:>7} {:>6} {:>5}   {:>8} {:>7} {:>7} {:>6} {:>5}",
            "", "Bias", "SD", "RMSE", "SE/SD", "CP.95", "Bias", "SD", "RMSE", "SE/SD", "CP.95"
        );
        for e in &s.estimators {
            five_stats(&mut out, &e.label, Some(&e.coef[0]), Some(&e.coef[1]));
        }
        let _ = writeln!(&mut out);
    }
    out
}

pub fn replicate(table: u32, reps: usize, seed: u64) -> CliResult<String> {
    let text = match table {
        2 => table_bandwidths(reps, seed),
        3 => table_jackknife(reps, seed),
        4 => properties_table(
            "Table 4: Finite Sample Properties - Balanced - Lagged Dependent Variable",
            balanced_designs(),
            0,
            reps,
            seed,
        ),
        5 => properties_table(
            "Table 5: Finite Sample Properties - Balanced - Exogenous Regressor",
            balanced_designs(),
            1,
            reps,
            seed,
        ),
        6 => properties_table(
            "Table 6: Properties - Unbalanced 1 - Lagged Dependent Variable",
            unbalanced_designs(Pattern::Pattern1),
            0,
            reps,
            seed,
        ),
        7 => properties_table(
            "Table 7: Properties - Unbalanced 1 - Exogenous Regressor",
            unbalanced_designs(Pattern::Pattern1),
            1,
            reps,
            seed,
        ),
        8 => {
            let mut out = properties_table(
                "Table 8: Properties - Unbalanced 2 - Lagged Dependent Variable",
                unbalanced_designs(Pattern::Pattern2),
                0,
                reps,
                seed,
            );
            out.push_str(&properties_table(
                "Table 8 (continued): Unbalanced 2 - Exogenous Regressor",
                unbalanced_designs(Pattern::Pattern2),
                1,
                reps,
                seed,
            ));
            out
        }
        9 => table_wald(reps, seed),
        12 => table_linear(reps, seed),
        other => return Err(twofe::Error::UnknownTable(other).into()),
    };
    Ok(text)
}
