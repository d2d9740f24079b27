//! dB / linear conversions and the "no signal" sentinel.

/// Power reported by a chain whose every path is blocked.
pub const NO_SIGNAL_DBM: f64 = f64::NEG_INFINITY;

pub fn is_no_signal(value_db: f64) -> bool {
    value_db == f64::NEG_INFINITY
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Zero maps to the no-signal sentinel.
pub fn linear_to_db(linear: f64) -> f64 {
    if linear <= 0.0 {
        NO_SIGNAL_DBM
    } else {
        10.0 * linear.log10()
    }
}

pub fn dbm_to_mw(dbm: f64) -> f64 {
    db_to_linear(dbm)
}

pub fn mw_to_dbm(mw: f64) -> f64 {
    linear_to_db(mw)
}
