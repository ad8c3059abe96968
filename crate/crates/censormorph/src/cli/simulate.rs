//! `simulate` subcommand: write one synthetic distance file.

use crate::error::Result;
use crate::lcdm::write_distances;
use crate::simulator::{
    derive_profile, generate, reference_profile, GeneratorParams, RemainderPlacement,
};
use std::path::Path;

pub struct SimulateRequest {
    pub eta: u32,
    pub r: f64,
    pub n: usize,
    pub seed: u64,
    pub placement: RemainderPlacement,
    pub out: std::path::PathBuf,
}

pub fn run(request: &SimulateRequest) -> Result<()> {
    let reference = reference_profile();
    let profile = derive_profile(&reference, request.eta, request.placement)?;
    let params = GeneratorParams {
        eta: request.eta,
        r: request.r,
        n: request.n,
        seed: request.seed,
    };
    let sample = generate(&profile, &params)?;
    write_distances(Path::new(&request.out), sample.distances())?;
    println!(
        "wrote {} distances to {} (eta = {}, r = {}, seed = {})",
        sample.len(),
        request.out.display(),
        request.eta,
        request.r,
        request.seed
    );
    Ok(())
}
