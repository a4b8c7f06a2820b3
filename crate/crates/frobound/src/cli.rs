//! Command-line front end: configuration, caching, table emission.

use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::arith::{rat_i64, Rat, Valuation, ZpCtx};
use crate::bounds::{order_bound, BoundProfile};
use crate::connection::Connection;
use crate::error::{Error, Result};
use crate::frobenius::{
    cache, deformation_phi, delta_valuation_check, elliptic_example_fiber, frobeq_residual,
    kedlaya_fiber_matrix, local_lift_phi_check, working_precision, FiberCurve, FrobeniusData,
};
use crate::reconstruct::{
    experiment_table, measured_order_at, rational_reconstruction, MeasureParams, PoleOrderRow,
};

pub const BUILTIN_FAMILY: &str = "elliptic-example";

#[derive(Parser, Debug)]
#[command(
    name = "frobound",
    about = "Effective convergence bounds for Frobenius structures on connections \
             over the p-adic projective line"
)]
pub struct Cli {
    #[command(subcommand)]
    pub cmd: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
    Csv,
}

#[derive(Args, Debug, Clone)]
pub struct CommonArgs {
    /// Built-in family id or path to a connection file.
    #[arg(long, default_value = BUILTIN_FAMILY)]
    pub family: String,

    /// Odd prime.
    #[arg(long)]
    pub p: u64,

    /// Target congruence exponent.
    #[arg(long = "M", default_value_t = 6)]
    pub m_target: u32,

    /// Series truncation order.
    #[arg(long = "K", default_value_t = 256)]
    pub k: usize,

    #[arg(long, default_value_t = 1)]
    pub m_min: u32,

    /// Defaults to M.
    #[arg(long)]
    pub m_max: Option<u32>,

    /// Vanishing-window length for order measurement.
    #[arg(long, default_value_t = 24)]
    pub window: usize,

    /// Numerator degree cap for the window test (derived if omitted).
    #[arg(long)]
    pub d_max: Option<usize>,

    /// Working-precision buffer B in Mw = M + ceil(log_p K) + B.
    #[arg(long, default_value_t = 5)]
    pub buffer: u32,

    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,

    /// Cache directory (FROBOUND_CACHE, or ./.frobound-cache).
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,

    /// Exclude i = 0 from the index sets defining c and g.
    #[arg(long)]
    pub no_zero_index: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Residue matrices, exponents and hypothesis validation per singular point.
    Exponents {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// alpha1, alpha2(m) and the order bound per m, with variant annotations.
    Bounds {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value_t = 0)]
        v_phi: i64,
        #[arg(long, default_value_t = -1)]
        v_phi_inv: i64,
    },
    /// Compute Phi by deformation, write the cache, report the residual.
    Deform {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Measure pole orders against the bounds over the m range.
    Verify {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Frobenius matrix of one fiber of the built-in family.
    Fiber {
        #[command(flatten)]
        common: CommonArgs,
        /// Integer fiber parameter.
        #[arg(long, default_value_t = 0)]
        tau: i64,
    },
    /// Check the divided-power valuation bound v_p(Delta^(i)) >= f(i).
    DeltaCheck {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value_t = 200)]
        imax: usize,
        /// Probe truncation per disc.
        #[arg(long, default_value_t = 48)]
        probe: usize,
    },
    /// Transport Phi mod p^m to the lift centred at z and check its order.
    LiftChange {
        #[command(flatten)]
        common: CommonArgs,
        /// Centre of the target lift (a singular point).
        #[arg(long, allow_hyphen_values = true)]
        z: String,
        #[arg(long)]
        m: u32,
    },
}

/// Validated job configuration shared by the commands.
pub struct JobConfig {
    pub family: String,
    pub conn: Connection,
    pub p: u64,
    pub m_target: u32,
    pub k: usize,
    pub m_min: u32,
    pub m_max: u32,
    pub window: usize,
    pub d_max: Option<usize>,
    pub buffer: u32,
    pub format: Format,
    pub cache_dir: PathBuf,
    pub include_zero_index: bool,
}

impl JobConfig {
    pub fn from_args(common: &CommonArgs) -> Result<Self> {
        let p = common.p;
        if !crate::arith::is_prime_u64(p) || p == 2 {
            return Err(Error::Unsupported(format!("p = {p} must be an odd prime")));
        }
        if common.m_target < 1 {
            return Err(Error::Invalid("M must be at least 1".into()));
        }
        if common.k < 64 {
            return Err(Error::Invalid("K must be at least 64".into()));
        }
        let m_max = common.m_max.unwrap_or(common.m_target);
        if common.m_min < 1 || m_max > common.m_target || common.m_min > m_max {
            return Err(Error::Invalid(format!(
                "m range [{}, {m_max}] must sit inside [1, {}]",
                common.m_min, common.m_target
            )));
        }
        let conn = if common.family == BUILTIN_FAMILY {
            Connection::elliptic_example(p)?
        } else {
            let text = std::fs::read_to_string(&common.family)?;
            let conn = crate::connection::parse_connection(&text)?;
            if conn.p() != p {
                return Err(Error::Invalid(format!(
                    "connection file prime {} does not match --p {p}",
                    conn.p()
                )));
            }
            conn
        };
        let cache_dir = common
            .cache_dir
            .clone()
            .or_else(|| std::env::var_os("FROBOUND_CACHE").map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(".frobound-cache"));
        Ok(JobConfig {
            family: common.family.clone(),
            conn,
            p,
            m_target: common.m_target,
            k: common.k,
            m_min: common.m_min,
            m_max,
            window: common.window,
            d_max: common.d_max,
            buffer: common.buffer,
            format: common.format,
            cache_dir,
            include_zero_index: !common.no_zero_index,
        })
    }

    /// Frobenius valuations for the bound profiles.  Verified on computed
    /// data for the built-in family; file-based connections take them
    /// from the caller.
    fn profiles(&self, v_phi: i64, v_phi_inv: i64) -> Result<Vec<(Rat, BoundProfile)>> {
        let v_n = match self.conn.v_on_v(self.conn.matrix(), self.window.max(32))? {
            Valuation::Finite(v) => v,
            other => {
                return Err(Error::Unsupported(format!("v_p(N) is not finite: {other}")))
            }
        };
        self.conn
            .finite_singular_points()
            .into_iter()
            .map(|z| {
                let mut pr =
                    BoundProfile::for_connection(&self.conn, &z, v_n, v_phi, v_phi_inv)?;
                pr.include_zero_index = self.include_zero_index;
                Ok((z, pr))
            })
            .collect()
    }

    fn require_builtin(&self, what: &str) -> Result<()> {
        if self.family != BUILTIN_FAMILY {
            return Err(Error::Unsupported(format!(
                "{what} needs a fiber algorithm and is only available for the \
                 built-in family `{BUILTIN_FAMILY}`"
            )));
        }
        Ok(())
    }

    /// Compute Phi or load it from the cache; returns the data and
    /// whether the cache was hit.
    pub fn deform_with_cache(&self) -> Result<(FrobeniusData, bool)> {
        self.require_builtin("deformation")?;
        let mw = working_precision(self.p, self.m_target, self.k, self.buffer);
        let path =
            cache::cache_path(&self.cache_dir, BUILTIN_FAMILY, self.p, self.m_target, mw, self.k);
        if let Some(data) = cache::load(
            &path,
            BUILTIN_FAMILY,
            self.p,
            self.m_target,
            mw,
            self.k,
            self.conn.dim(),
        )? {
            return Ok((data, true));
        }
        let ctx = ZpCtx::new(self.p, mw)?;
        let fiber = elliptic_example_fiber(&rat_i64(0))?;
        let curve = FiberCurve::new(fiber, self.p, self.m_target)?;
        let phi0 = kedlaya_fiber_matrix(&curve, &ctx)?;
        let data =
            deformation_phi(&self.conn, &phi0, &ctx, self.k, self.m_target, BUILTIN_FAMILY)?;
        cache::write_atomic(&path, &data)?;
        Ok((data, false))
    }

    fn measure_params(&self) -> MeasureParams {
        MeasureParams { window: self.window, d_max: self.d_max }
    }
}

pub fn run(cli: Cli) -> Result<()> {
    let mut out = String::new();
    run_to(&mut out, cli)?;
    print!("{out}");
    Ok(())
}

/// Render a command's output into a string (deterministic bytes for a
/// fixed configuration).
pub fn run_to(out: &mut String, cli: Cli) -> Result<()> {
    use std::fmt::Write;
    match cli.cmd {
        Command::Exponents { common } => {
            let cfg = JobConfig::from_args(&common)?;
            let mut failed = false;
            let mut reports = Vec::new();
            for z in cfg.conn.finite_singular_points() {
                let rep = cfg.conn.validate_theorem_hypotheses(&z);
                failed |= !rep.all_pass();
                let exps = cfg.conn.exponents(&z).ok();
                let res = cfg.conn.residue_matrix(&z).ok();
                reports.push((z, res, exps, rep));
            }
            match cfg.format {
                Format::Json => {
                    let arr: Vec<serde_json::Value> = reports
                        .iter()
                        .map(|(z, res, exps, rep)| {
                            serde_json::json!({
                                "z": z.to_string(),
                                "residue": res.as_ref().map(|m| {
                                    (0..m.dim()).map(|i| {
                                        (0..m.dim()).map(|j| m[(i, j)].to_string()).collect::<Vec<_>>()
                                    }).collect::<Vec<_>>()
                                }),
                                "exponents": exps.as_ref().map(|e| {
                                    e.iter().map(|x| x.to_string()).collect::<Vec<_>>()
                                }),
                                "validation": rep,
                            })
                        })
                        .collect();
                    writeln!(out, "{}", serde_json::to_string_pretty(&arr).expect("json")).ok();
                }
                _ => {
                    if reports.is_empty() {
                        writeln!(out, "no singular points").ok();
                    }
                    for (z, res, exps, rep) in &reports {
                        writeln!(out, "z = {z}").ok();
                        if let Some(m) = res {
                            for i in 0..m.dim() {
                                let row: Vec<String> =
                                    (0..m.dim()).map(|j| m[(i, j)].to_string()).collect();
                                writeln!(out, "  residue[{i}] = [{}]", row.join(", ")).ok();
                            }
                        }
                        match exps {
                            Some(e) => {
                                let s: Vec<String> = e.iter().map(|x| x.to_string()).collect();
                                writeln!(out, "  exponents = {{{}}}", s.join(", ")).ok();
                            }
                            None => {
                                writeln!(out, "  exponents = (not rational)").ok();
                            }
                        }
                        writeln!(
                            out,
                            "  hypotheses: pole={} simple={} rational={} p-integral={} \
                             discs={} z-integral={} => {}",
                            rep.has_pole,
                            rep.simple_pole,
                            rep.exponents_rational,
                            rep.exponents_p_integral,
                            rep.distinct_residue_discs,
                            rep.z_p_integral,
                            if rep.all_pass() { "PASS" } else { "FAIL" }
                        )
                        .ok();
                        for note in &rep.notes {
                            writeln!(out, "    note: {note}").ok();
                        }
                    }
                }
            }
            if failed {
                print!("{out}");
                out.clear();
                return Err(Error::Unsupported(
                    "hypothesis validation failed at some singular point".into(),
                ));
            }
            Ok(())
        }
        Command::Bounds { common, v_phi, v_phi_inv } => {
            let cfg = JobConfig::from_args(&common)?;
            let profiles = cfg.profiles(v_phi, v_phi_inv)?;
            let mut rows: Vec<(String, crate::bounds::BoundRow)> = Vec::new();
            for (z, pr) in &profiles {
                for m in cfg.m_min..=cfg.m_max {
                    rows.push((z.to_string(), order_bound(m, pr)?));
                }
            }
            match cfg.format {
                Format::Json => {
                    let arr: Vec<serde_json::Value> = rows
                        .iter()
                        .map(|(z, r)| {
                            serde_json::json!({
                                "z": z, "m": r.m, "alpha1": r.alpha1, "g": r.g,
                                "alpha2": r.alpha2, "bound": r.order_bound,
                                "variant": crate::reconstruct::variant_label(r),
                            })
                        })
                        .collect();
                    writeln!(out, "{}", serde_json::to_string_pretty(&arr).expect("json")).ok();
                }
                Format::Csv => {
                    writeln!(out, "z,m,alpha1,g,alpha2,bound,variant").ok();
                    for (z, r) in &rows {
                        writeln!(
                            out,
                            "{z},{},{},{},{},{},{}",
                            r.m,
                            r.alpha1,
                            r.g,
                            r.alpha2,
                            r.order_bound,
                            crate::reconstruct::variant_label(r)
                        )
                        .ok();
                    }
                }
                Format::Table => {
                    writeln!(out, "{:>6} {:>4} {:>7} {:>6} {:>7} {:>7} variant", "z", "m", "alpha1", "g", "alpha2", "bound").ok();
                    for (z, r) in &rows {
                        writeln!(
                            out,
                            "{z:>6} {:>4} {:>7} {:>6} {:>7} {:>7} {}",
                            r.m,
                            r.alpha1,
                            r.g,
                            r.alpha2,
                            r.order_bound,
                            crate::reconstruct::variant_label(r)
                        )
                        .ok();
                    }
                }
            }
            Ok(())
        }
        Command::Deform { common } => {
            let cfg = JobConfig::from_args(&common)?;
            let (data, hit) = cfg.deform_with_cache()?;
            if hit {
                writeln!(out, "cache hit").ok();
            } else {
                writeln!(out, "cache written").ok();
            }
            let residual = frobeq_residual(&cfg.conn, &data)?;
            writeln!(
                out,
                "p={} M={} Mw={} K={} acc={} residual_valuation={}",
                data.p, data.m_target, data.mw, data.k, data.acc, residual
            )
            .ok();
            if !residual.ge(data.acc as i64) {
                print!("{out}");
                out.clear();
                return Err(Error::Precision {
                    msg: format!("residual valuation {residual} below accuracy {}", data.acc),
                    needed: data.mw + cfg.buffer,
                });
            }
            Ok(())
        }
        Command::Verify { common } => {
            let cfg = JobConfig::from_args(&common)?;
            let (data, _) = cfg.deform_with_cache()?;
            let profiles = cfg.profiles(0, -1)?;
            let reports = experiment_table(
                &data,
                &cfg.conn,
                &profiles,
                cfg.m_min..=cfg.m_max,
                &cfg.measure_params(),
            )?;
            let rows: Vec<&PoleOrderRow> = reports.iter().flat_map(|r| r.rows.iter()).collect();
            emit_pole_rows(out, &rows, cfg.format);
            Ok(())
        }
        Command::Fiber { common, tau } => {
            let cfg = JobConfig::from_args(&common)?;
            cfg.require_builtin("the fiber matrix")?;
            let mw = working_precision(cfg.p, cfg.m_target, 2, cfg.buffer);
            let ctx = ZpCtx::new(cfg.p, mw)?;
            let fiber = elliptic_example_fiber(&rat_i64(tau))?;
            let curve = FiberCurve::new(fiber, cfg.p, cfg.m_target)?;
            let phi0 = kedlaya_fiber_matrix(&curve, &ctx)?;
            let ap = crate::frobenius::fiber::trace_of_frobenius(&phi0)?;
            let v = phi0.min_val();
            let vinv = phi0.inverse_valuation()?;
            writeln!(out, "fiber tau={tau} p={} modulus_exp={}", cfg.p, mw).ok();
            writeln!(out, "a_p = {ap}").ok();
            for i in 0..2 {
                for j in 0..2 {
                    writeln!(out, "phi0[{i}][{j}] = {}", phi0[(i, j)].mantissa()).ok();
                }
            }
            writeln!(out, "v_p(phi0) = {v}").ok();
            writeln!(out, "v_p(phi0^-1) = {vinv}").ok();
            Ok(())
        }
        Command::DeltaCheck { common, imax, probe } => {
            let cfg = JobConfig::from_args(&common)?;
            let profiles = cfg.profiles(0, -1)?;
            let (_, profile) = profiles
                .first()
                .ok_or_else(|| Error::Unsupported("no singular points to profile".into()))?;
            let rep = delta_valuation_check(&cfg.conn, profile, imax, probe)?;
            match cfg.format {
                Format::Json => {
                    writeln!(out, "{}", serde_json::to_string_pretty(&rep).expect("json")).ok();
                }
                _ => {
                    writeln!(out, "i_max={} probe={}", rep.i_max, rep.k_probe).ok();
                    writeln!(out, "violations: {}", rep.violations.len()).ok();
                    for (i, v, f) in &rep.violations {
                        writeln!(out, "  i={i}: v={v} < f={f}").ok();
                    }
                }
            }
            if !rep.violations.is_empty() {
                print!("{out}");
                out.clear();
                return Err(Error::TheoremViolation(format!(
                    "{} divided-power valuation violations",
                    rep.violations.len()
                )));
            }
            Ok(())
        }
        Command::LiftChange { common, z, m } => {
            let cfg = JobConfig::from_args(&common)?;
            let z: Rat = parse_rational(&z)?;
            if m > cfg.m_target {
                return Err(Error::Invalid(format!("m = {m} exceeds M = {}", cfg.m_target)));
            }
            let (data, _) = cfg.deform_with_cache()?;
            let profiles = cfg.profiles(0, -1)?;
            let orders: Vec<(Rat, i64)> = cfg
                .conn
                .finite_singular_points()
                .into_iter()
                .map(|w| {
                    let o = measured_order_at(&data, &cfg.conn, &profiles, &w, m, &cfg.measure_params())?
                        .floor();
                    Ok((w, o))
                })
                .collect::<Result<_>>()?;
            let rec = rational_reconstruction(&data, &orders, m, cfg.window)?;
            let profile = profiles
                .iter()
                .find(|(w, _)| w == &z)
                .map(|(_, pr)| pr)
                .ok_or_else(|| Error::Invalid(format!("z = {z} is not a singular point")))?;
            let rep = local_lift_phi_check(&rec, &cfg.conn, &z, m, profile)?;
            match cfg.format {
                Format::Json => {
                    writeln!(out, "{}", serde_json::to_string_pretty(&rep).expect("json")).ok();
                }
                _ => {
                    writeln!(
                        out,
                        "centred lift at z={}: order mod p^{} is {} (required >= {}): {}",
                        rep.z,
                        rep.m,
                        rep.measured_order_floor,
                        rep.required_order,
                        if rep.order_ok { "OK" } else { "VIOLATION" }
                    )
                    .ok();
                    writeln!(
                        out,
                        "v_p(phi') = {} (required >= {}): {}",
                        rep.v_phi_measured,
                        rep.v_phi_required,
                        if rep.v_phi_ok { "OK" } else { "VIOLATION" }
                    )
                    .ok();
                }
            }
            Ok(())
        }
    }
}

fn emit_pole_rows(out: &mut String, rows: &[&PoleOrderRow], format: Format) {
    use std::fmt::Write;
    match format {
        Format::Json => {
            writeln!(out, "{}", serde_json::to_string_pretty(rows).expect("json")).ok();
        }
        Format::Csv => {
            writeln!(out, "p,z,m,measured_order,bound,variant,sharp").ok();
            for r in rows {
                writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    r.p, r.z, r.m, r.measured_order, r.bound, r.variant, r.sharp
                )
                .ok();
            }
        }
        Format::Table => {
            writeln!(
                out,
                "{:>3} {:>6} {:>4} {:>9} {:>7} {:>16} sharp",
                "p", "z", "m", "measured", "bound", "variant"
            )
            .ok();
            for r in rows {
                writeln!(
                    out,
                    "{:>3} {:>6} {:>4} {:>9} {:>7} {:>16} {}",
                    r.p, r.z, r.m, r.measured_order, r.bound, r.variant, r.sharp
                )
                .ok();
            }
        }
    }
}

pub fn parse_rational(s: &str) -> Result<Rat> {
    Rat::from_str(s.trim())
        .map_err(|_| Error::Invalid(format!("cannot parse rational number '{s}'")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn common(p: u64) -> CommonArgs {
        CommonArgs {
            family: BUILTIN_FAMILY.into(),
            p,
            m_target: 3,
            k: 128,
            m_min: 1,
            m_max: None,
            window: 16,
            d_max: None,
            buffer: 5,
            format: Format::Csv,
            cache_dir: Some(std::env::temp_dir().join(format!("frobound-cli-{}", std::process::id()))),
            no_zero_index: false,
        }
    }

    #[test]
    fn config_validation() {
        let mut c = common(4);
        assert!(JobConfig::from_args(&c).is_err());
        c.p = 3;
        c.k = 10;
        assert!(JobConfig::from_args(&c).is_err());
        c.k = 128;
        c.m_min = 5;
        assert!(JobConfig::from_args(&c).is_err());
        c.m_min = 1;
        assert!(JobConfig::from_args(&c).is_ok());
    }

    #[test]
    fn exponents_output() {
        let mut out = String::new();
        let cli = Cli { cmd: Command::Exponents { common: common(3) } };
        run_to(&mut out, cli).unwrap();
        assert!(out.contains("exponents = {-1/4, 1/4}"), "{out}");
        assert!(out.contains("exponents = {0, 0}"), "{out}");
        assert!(out.contains("PASS"));
    }

    #[test]
    fn exponents_fail_at_two() {
        let mut out = String::new();
        let cli = Cli { cmd: Command::Exponents { common: common(2) } };
        let err = run_to(&mut out, cli).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn no_singular_points_report() {
        let dir = std::env::temp_dir().join(format!("frobound-cli-file-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("zero.conn");
        std::fs::write(&path, "1\n3\n0\n").unwrap();
        let mut c = common(3);
        c.family = path.to_string_lossy().into_owned();
        let mut out = String::new();
        run_to(&mut out, Cli { cmd: Command::Exponents { common: c } }).unwrap();
        assert!(out.contains("no singular points"), "{out}");
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn identical_config_identical_bytes() {
        let mut a = String::new();
        let mut b = String::new();
        run_to(&mut a, Cli { cmd: Command::Bounds { common: common(3), v_phi: 0, v_phi_inv: -1 } })
            .unwrap();
        run_to(&mut b, Cli { cmd: Command::Bounds { common: common(3), v_phi: 0, v_phi_inv: -1 } })
            .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn bounds_table_csv() {
        let mut out = String::new();
        let cli = Cli {
            cmd: Command::Bounds { common: common(3), v_phi: 0, v_phi_inv: -1 },
        };
        run_to(&mut out, cli).unwrap();
        // z = -2 rows carry bound -3 g(m)
        assert!(out.contains("-2,1,0,0,0,0,base"), "{out}");
        assert!(out.contains("-2,3,0,3,3,-9,base"), "{out}");
    }
}
