//! CSV export of integrated trajectories.

use std::io::Write;

use symlab_core::dynamics::{trajectory_rows, DynamicsError, ModelInstance, Trajectory};

pub const HEADER: [&str; 13] = ["tau", "u0", "u1", "u2", "u3", "p0", "p1", "p2", "p3", "H", "Y1", "Y2", "Y3"];

#[derive(Debug, thiserror::Error)]
pub enum CsvError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

pub fn write_csv<W: Write>(out: W, traj: &Trajectory, inst: &ModelInstance) -> Result<(), CsvError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    for row in trajectory_rows(traj, inst)? {
        w.write_record(row.iter().map(|v| format!("{v:.17e}")))?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}
