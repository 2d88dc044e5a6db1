//! Splits head positions into compliant and non-compliant persons.
//!
//! Run with `cargo run --example compliance`.

use vsd::annotations::{classify_compliance, HeadAnnotation, DEFAULT_DISTANCE_THRESHOLD};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let heads = [
        (1.0, 1.0),
        (2.2, 1.4),
        (2.9, 2.6),
        (9.0, 4.0),
        (4.0, 9.0),
        (5.95, 9.0),
        (6.05, 12.0),
    ]
    .iter()
    .enumerate()
    .map(|(i, &(x, y))| HeadAnnotation::plane(0, x, y).with_person(i as u64))
    .collect::<Vec<_>>();

    let part = classify_compliance(&heads, DEFAULT_DISTANCE_THRESHOLD)?;
    println!("d_t = {} m", part.threshold);
    for (i, h) in heads.iter().enumerate() {
        println!(
            "person {i} at ({:>5.2}, {:>5.2})  d_i = {:>6.3}  {}",
            h.position[0],
            h.position[1],
            part.distances[i],
            part.labels[i].as_str()
        );
    }
    println!("{} NSDC, {} SDC", part.nsdc.len(), part.sdc.len());
    Ok(())
}
