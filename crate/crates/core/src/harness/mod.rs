//! Experiment orchestration: configuration, ensemble runs with distance
//! tracking, rate fits and the CSV / gnuplot outputs.
//!
//! Run directory layout:
//!
//! | file | content |
//! |------|---------|
//! | `config.echo` | every configuration key with its effective value |
//! | `trace.csv` | `t,a_t,tv,tv_se,w1,mean_V,min_V`, one row per record time |
//! | `samples_t<t>.csv` | `x0,x1,…`, the ensemble at record time `t` |
//! | `plots.dat` | gnuplot two-column blocks, `index k` selects a series |
//! | `compare.csv` | `t,a_t` then `tv,tv_se,w1` for `eta = 1`, `compare.eta` and the continuous process |
//! | `gibbs_tv.csv` | `n,T_n,a_n,a_next,tv,u_n` |
//! | `audit.txt` | assumption report |
//! | `failure.txt` | exit code and error of a failed run |

mod config;
mod experiment;
mod fit;
mod sweep;
mod table;

pub use config::{
    parse_assignment, ExperimentConfig, PotentialKind, RecordSpec, Scheme, SigmaKind, DEFAULT_OUTPUT_ROOT,
    OUTPUT_ROOT_ENV,
};
pub use experiment::{
    compare_schemes, level_at, run_experiment, samples_file_name, sim_spec, simulate, trace_of, CompareReport,
    RunReport, COMPARE_COLUMNS, FAILURE_FILE, TRACE_COLUMNS,
};
pub use fit::{fit_power_law, fit_rate, RateFit, PREDICTED_EXPONENT_RANGE};
pub use sweep::{audit, gibbs_tv_sweep, SweepReport, SWEEP_COLUMNS};
pub use table::Table;
