use super::{Algorithm, BoxState, Forecast, Horizon, Space};
use crate::geometry::{Camera, Pose2};
use crate::sim::{pedestrian_advance, WorldState};
use crate::Error;

/// Advances a copy of the pedestrian frame by frame, recording its true
/// world-space state at every horizon offset.
pub fn gt_forecast(
    world: &WorldState,
    object_id: u32,
    horizon: Horizon,
) -> Result<Forecast<f64>, Error> {
    let mut ped = world
        .pedestrian(object_id)
        .ok_or(Error::UnknownObject(object_id))?
        .clone();
    let dt = world.config.dt;
    let mut entries = Vec::with_capacity(horizon.horizon);
    for k in 1..=horizon.last_offset() {
        ped = pedestrian_advance(&ped, dt);
        if k % horizon.stride == 0 {
            entries.push((k, BoxState::from_cylinder(&ped.extent)));
        }
    }
    Ok(Forecast {
        object_id,
        algorithm: Algorithm::Gt,
        space: Space::World,
        entries,
    })
}

/// Ground-truth future boxes projected through the current camera.
/// `Ok(None)` when any future position falls behind the camera.
pub fn gt_forecast_image(
    world: &WorldState,
    object_id: u32,
    horizon: Horizon,
    camera: &Camera<f64>,
    pose: &Pose2<f64>,
) -> Result<Option<Forecast<f64>>, Error> {
    let world_fc = gt_forecast(world, object_id, horizon)?;
    let mut entries = Vec::with_capacity(world_fc.len());
    for (k, b) in world_fc.entries {
        let cyl = b.to_cylinder().ok_or(Error::InvalidCylinder)?;
        match camera.cylinder_box(pose, &cyl) {
            Some(bx) => entries.push((k, BoxState::from_image_box(&bx))),
            None => return Ok(None),
        }
    }
    Ok(Some(Forecast {
        object_id,
        algorithm: Algorithm::Gt,
        space: Space::Image,
        entries,
    }))
}
