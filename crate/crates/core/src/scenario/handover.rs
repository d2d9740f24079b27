use crate::channel::{channel_matrix, normalize, rssi_per_chain, Scene, Vec3};
use crate::error::{Error, Result};
use crate::mimo::mrc_rssi_dbm;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HandoverRow {
    pub angle_deg: f64,
    pub rssi_a_dbm: f64,
    pub rssi_b_dbm: f64,
    pub rssi_mrc_dbm: f64,
}

fn angle_between(a: Vec3, b: Vec3) -> f64 {
    let a = normalize(a);
    let b = normalize(b);
    let c = (a[0] * b[0] + a[1] * b[1] + a[2] * b[2]).clamp(-1.0, 1.0);
    c.acos()
}

/// Rotates unit vector `from` by `angle_deg` toward `to` in the plane they
/// span.
pub fn rotate_toward(from: Vec3, to: Vec3, angle_deg: f64) -> Result<Vec3> {
    let from = normalize(from);
    let to = normalize(to);
    let total = angle_between(from, to);
    if total < 1e-12 {
        return Ok(from);
    }
    if (std::f64::consts::PI - total).abs() < 1e-9 {
        return Err(Error::Domain(
            "rotation plane undefined for opposite vectors".into(),
        ));
    }
    // Unit vector orthogonal to `from`, in the plane of `from` and `to`.
    let c = total.cos();
    let perp = normalize([
        to[0] - c * from[0],
        to[1] - c * from[1],
        to[2] - c * from[2],
    ]);
    let (s, c) = angle_deg.to_radians().sin_cos();
    Ok(normalize([
        c * from[0] + s * perp[0],
        c * from[1] + s * perp[1],
        c * from[2] + s * perp[2],
    ]))
}

/// Rotation angles from 0 to the full A→B sweep, `step_deg` apart; the end
/// point is always included.
pub fn handover_grid(scene: &Scene, step_deg: f64) -> Result<Vec<f64>> {
    if !(step_deg > 0.0 && step_deg.is_finite()) {
        return Err(Error::Domain(format!("step must be > 0, got {step_deg}")));
    }
    let (_, a, b) = endpoints(scene)?;
    let total = angle_between(a, b).to_degrees();
    let n = (total / step_deg).floor() as usize;
    let mut grid: Vec<f64> = (0..=n).map(|i| i as f64 * step_deg).collect();
    if total - grid[n] > 1e-9 {
        grid.push(total);
    }
    Ok(grid)
}

/// TX index plus the directions from the TX to RX A and RX B.
fn endpoints(scene: &Scene) -> Result<(String, Vec3, Vec3)> {
    let txs: Vec<_> = scene.transmitters().collect();
    let rxs: Vec<_> = scene.receivers().collect();
    let ([tx], [ra, rb]) = (txs.as_slice(), rxs.as_slice()) else {
        return Err(Error::Contract(format!(
            "handover sweep needs 1 TX and 2 RX, scene has {} and {}",
            txs.len(),
            rxs.len()
        )));
    };
    let dir = |p: Vec3| {
        [
            p[0] - tx.position[0],
            p[1] - tx.position[1],
            p[2] - tx.position[2],
        ]
    };
    Ok((tx.id.clone(), dir(ra.position), dir(rb.position)))
}

/// RSSI of both paths and their MRC combination while the TX boresight
/// turns from RX A to RX B. Angles are measured from the A direction.
pub fn run_handover_sweep(scene: &Scene, angles_deg: &[f64]) -> Result<Vec<HandoverRow>> {
    scene.ensure_valid()?;
    let (tx_id, a, b) = endpoints(scene)?;
    let powers = scene.tx_powers_dbm();
    angles_deg
        .iter()
        .map(|&angle_deg| {
            let mut rotated = scene.clone();
            let tx = rotated.front_end_mut(&tx_id).expect("tx exists");
            tx.boresight = rotate_toward(a, b, angle_deg)?;
            let cm = channel_matrix(&rotated, 0, &[])?;
            let rssi = rssi_per_chain(&cm, &powers)?;
            Ok(HandoverRow {
                angle_deg,
                rssi_a_dbm: rssi[0],
                rssi_b_dbm: rssi[1],
                rssi_mrc_dbm: mrc_rssi_dbm(&rssi),
            })
        })
        .collect()
}
