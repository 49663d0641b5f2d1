#![no_main]

use hyperroute::cli::RunManifest;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let _ = serde_json::from_slice::<RunManifest>(data);
});
