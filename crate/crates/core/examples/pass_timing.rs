use std::time::Instant;

use wearcast_core::{DeltaEncoding, ModelParams, NetworkConfig, Tensor, Variant};

fn main() {
    let cfg = NetworkConfig::desk(Variant::Forward);
    let p = ModelParams::<f32>::build(cfg, 1).unwrap();
    let x = Tensor::<f32>::from_fn(&[1, 160, 64], |i| (i % 7) as f32 / 7.0);
    let d = DeltaEncoding::scalar(8).unwrap();
    let t = Instant::now();
    let n = 50;
    for _ in 0..n {
        let _ = p.loss_and_grad(&x, &d, &x, 1).unwrap();
    }
    println!("params {} ; {:.2} ms per forward+backward", p.parameter_count(), t.elapsed().as_secs_f64() * 1e3 / n as f64);
    let t = Instant::now();
    for _ in 0..n {
        let _ = p.forward_tensor(&x, &d).unwrap();
    }
    println!("{:.2} ms per forward", t.elapsed().as_secs_f64() * 1e3 / n as f64);
}
