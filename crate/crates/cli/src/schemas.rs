//! File schemas printed by `--help`.

pub const GROUND_STATE: &str = "\
Writes <out>/threshold.json:
  { \"m_closed_form\": f64, \"m_quadrature\": f64,
    \"sobolev_constant\": f64, \"discrepancy\": f64 }
m_closed_form is sqrt(3) pi^2 / 4; m_quadrature is the critical energy of the
ground state W(r) = (1 + r^2/3)^(-1/2) by tail-corrected quadrature.";

pub const FUNCTIONALS: &str = "\
Reads a field snapshot CSV with header `r,re,im` (one row per interior node,
uniform spacing, r_max = (n + 1) * dr).
Writes <out>/functionals.json, or stdout without --out:
  { \"mass\", \"energy\", \"critical_energy\", \"K\", \"K_Q\", \"K_N\", \"K_c\", \"H\",
    \"l2_sq\", \"grad_sq\", \"l4_4\", \"l6_6\", \"boundary_mass_fraction\" }  (all f64)";

pub const MAKE_DATA: &str = "\
Builds (1+eps) lambda^(-1/2) chi_R(x/lambda) W(x/lambda) with lambda = |eps|^3.
Grid lengths given by --r-max are in units of lambda.
Writes <out>/field.csv (`r,re,im`) and <out>/report.json:
  { \"eps\": f64, \"R\": f64, \"length\": f64,
    \"classification\": \"K_plus\" | \"K_minus\" | \"above_threshold\" | \"zero\",
    \"functionals\": { ...as in `functionals` } }";

pub const VERIFY_VARIATIONAL: &str = "\
Writes <out>/variational.json:
  { \"seed\": u64, \"count\": usize, \"m\": f64,
    \"k_nonnegative\": usize, \"k_negative\": usize,
    \"lemmas\": [ { \"name\": str, \"hard\": bool, \"tolerance\": f64,
                  \"checked\": usize, \"passed\": usize, \"worst_margin\": f64 | null } ],
    \"inf_mass_plus_energy_on_nehari\": f64 | null,
    \"all_hard_pass\": bool }
A margin is (bound - value) in the lemma's units; it passes when >= -tolerance.
Exits 1 when any hard check fails.";

pub const EVOLVE: &str = "\
Config (JSON, unknown keys rejected):
  { \"schema\": 1,
    \"grid\": { \"r_max\": f64, \"n\": usize },     n + 1 a power of two, n >= 16
    \"length_scale\": f64 = 1,                    lengths scale by it, times by its square
    \"dt0\": f64, \"t_end\": f64,
    \"f1_on\": bool = true, \"f2_on\": bool = true,  quintic and cubic terms
    \"adapt\": \"none\" | \"gradient_capped\" = \"none\", \"c_adapt\": f64 = 0.1,
    \"blowup_gradient_factor\": f64 = 1000, \"blowup_dt_floor\": f64,
    \"output_every\": usize,
    \"virial_R_list\": [f64], \"exterior_R_list\": [f64],
    \"seed\": u64 = 0, \"noise_amplitude\": f64 = 0,
    \"absorber\": { \"width\": f64, \"strength\": f64 } | null,
    \"thresholds\": { \"decay_factor\": 10, \"rate_floor\": 0.25, \"late_fraction\": 0.2,
                    \"transient_fraction\": 0.05, \"monotone_window\": 5 },
    \"initial\": { \"kind\": \"k_data\", \"eps\": f64, \"R\": f64 | null }
               | { \"kind\": \"profile\", \"profile\": { \"shape\": {\"kind\": ...}, \"amplitude\", \"length\" } }
               | { \"kind\": \"snapshot\", \"path\": str } }
Writes <out>/trajectory.csv with columns
  t,M,E,Ec,K,H,grad2,L4,L6,VR@<R>...,d2VR@<R>...,extE@<R>...,st5,st10,bmf
and <out>/verdict.json:
  { \"kind\": \"BlewUp\" | \"ScatteredLike\" | \"Undetermined\", \"reason\": str,
    \"stop\": { \"kind\": \"completed\" | \"dt_floor\" | \"non_finite\" | \"gradient_factor\", \"t\": f64, ... },
    \"evidence\": [ { \"name\", \"value\", \"threshold\", \"pass\" } ],
    \"certificate\": { \"delta1\", \"R\", \"samples_checked\", \"violations\": [...],
                      \"window\": [f64, f64] | null, \"sharpest_eps\", \"pass\" } | null,
    \"note\": str }";

pub const DICHOTOMY: &str = "\
Config (optional JSON):
  { \"schema\": 1, \"eps_list\": [f64] = [-0.2,-0.1,-0.05,0.05,0.1,0.2],
    \"dt0\": f64 = 5e-4, \"workers\": usize = 0 (one per core), \"thresholds\": {...} }
Each eps runs with a calibrated geometry in units of |eps|^3.
Writes <out>/eps_<+e.eeee>/{trajectory.csv, verdict.json} as in `evolve`, and
<out>/summary.json:
  { \"schema\": 1, \"m\": f64, \"all_expected\": bool,
    \"entries\": [ { \"eps\", \"R\", \"geometry\", \"classification\", \"initial\",
                   \"verdict\", \"certificate_pass\", \"expected\", \"peak_grad_sq\",
                   \"stop\", \"stop_time_natural\", \"mass_drift\", \"energy_drift\" } ] }
Entries are ordered by eps.";

pub const PROFILES: &str = "\
Reads a field snapshot CSV (`r,re,im`) and optionally a reference on the same grid.
Writes <out>/bubble.json:
  { \"nu\": f64, \"k_star\": u32, \"r_star\": f64, \"h\": f64,
    \"correlation_if_reference_given\": f64 | null, \"remainder_nu\": f64 }
plus <out>/profile.csv (unit-L2 profile on the reference grid y in (0, 16))
and <out>/remainder.csv.";
