mod quantize {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/quantize.rs"));
}

#[test]
fn quantize_example_runs() {
    quantize::run_example().expect("quantize example should run");
}

mod qgemm {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/qgemm.rs"));
}

#[test]
fn qgemm_example_runs() {
    qgemm::run_example().expect("qgemm example should run");
}

mod randomized_svd {
    include!(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/examples/randomized_svd.rs"
    ));
}

#[test]
fn randomized_svd_example_runs() {
    randomized_svd::run_example().expect("randomized_svd example should run");
}

mod lramm_multiply {
    include!(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/examples/lramm_multiply.rs"
    ));
}

#[test]
fn lramm_multiply_example_runs() {
    lramm_multiply::run_example().expect("lramm_multiply example should run");
}

mod error_bounds {
    include!(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/examples/error_bounds.rs"
    ));
}

#[test]
fn error_bounds_example_runs() {
    error_bounds::run_example().expect("error_bounds example should run");
}

mod cost_model {
    include!(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/examples/cost_model.rs"
    ));
}

#[test]
fn cost_model_example_runs() {
    cost_model::run_example().expect("cost_model example should run");
}

mod sweep {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/sweep.rs"));
}

#[test]
fn sweep_example_runs() {
    sweep::run_example().expect("sweep example should run");
}

mod spectrum {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/spectrum.rs"));
}

#[test]
fn spectrum_example_runs() {
    spectrum::run_example().expect("spectrum example should run");
}

mod profile {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/profile.rs"));
}

#[test]
fn profile_example_runs() {
    profile::run_example().expect("profile example should run");
}

mod verify_bounds {
    include!(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/examples/verify_bounds.rs"
    ));
}

#[test]
fn verify_bounds_example_runs() {
    verify_bounds::run_example().expect("verify_bounds example should run");
}

mod matrix_io {
    include!(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/examples/matrix_io.rs"
    ));
}

#[test]
fn matrix_io_example_runs() {
    matrix_io::run_example().expect("matrix_io example should run");
}
