//! Recurrent encoder over engagement sequences whose classes differ only in
//! timing.

use nalgebra::DVector;
use misinfo_netkit::seqrep::{accuracy, planted_timing_dataset, sequence_inputs, train, EncoderShape, RecurrentEncoder, TrainConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let data: Vec<(Vec<DVector<f64>>, i8)> =
        planted_timing_dataset(3, 60, 2).iter().map(|(f, y)| (sequence_inputs(f, true), *y)).collect();
    let (train_set, test_set) = data.split_at(80);
    let shape = EncoderShape { input: data[0].0[0].len(), embed: 8, hidden: 8, output: 4 };
    let mut enc = RecurrentEncoder::random(shape, 3);
    println!("untrained held-out accuracy {:.3}", accuracy(&enc, test_set)?);
    let losses = train(&mut enc, train_set, &TrainConfig { epochs: 30, lr: 0.05, clip: 5.0, seed: 3 })?;
    for (epoch, loss) in losses.iter().enumerate().step_by(5) {
        println!("epoch {epoch:>2}  mean loss {loss:.4}");
    }
    println!("trained held-out accuracy {:.3}", accuracy(&enc, test_set)?);
    let v = enc.encode_inputs(&test_set[0].0)?;
    println!("news vector of the first test item: {:.3?}", v.as_slice());
    Ok(())
}
