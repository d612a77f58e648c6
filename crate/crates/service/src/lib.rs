//! Live websocket service and headless tools for the head-tilt
//! teleoperation pipeline in `hat-core`.

pub mod commands;
pub mod config;
pub mod server;
pub mod wire;
