//! Disturbance observer, pole-region PID design and the speed schedule.

mod discrete;
mod dob;
mod param_space;
mod pid;
mod qfilter;
mod region;
mod schedule;

pub use discrete::{bilinear, DiscreteFilter};
pub use dob::{dob_loop_tfs, inverse_branch, synthesize_dob, DobCompensator, DobLoop, DobSettings};
pub use param_space::{
    admissible_gain_map, closed_loop_polynomial, closed_loop_poles, crb_trace, rrb_line, select_gains,
    select_gains_with_tau, AdmissibleMap, CrbPoint, GainGrid, RrbLine, SelectionRule, MAP_MARGIN,
};
pub use pid::{DiscretePid, PidGains, DEFAULT_TAU_D};
pub use qfilter::{make_nominal, make_q_filter, QFilter, NOMINAL_SCALE};
pub use region::{d_stable, region_violations, violation, DRegion, DecayBound, RegionPolicy};
pub use schedule::{
    build_schedule, build_schedule_with_maps, design_at_speed, design_plant, DesignSettings, GainSchedule,
    Interpolation, ScheduleEntry,
};
