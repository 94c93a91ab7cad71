//! Simulates a short run, writes its event stream as binary time tags and
//! reads it back.
//!
//! cargo run --release --example time_tags -- [out.bin]

use std::fs::File;
use std::io::{BufReader, BufWriter};

use hsps::sim::timetag::{read_time_tags, write_time_tags};
use hsps::sim::{simulate_events, EventTag, SimConfig};

fn main() {
    let path = std::env::args().nth(1).unwrap_or_else(|| {
        std::env::temp_dir()
            .join("hsps_tags.bin")
            .display()
            .to_string()
    });
    let config = SimConfig {
        duration: 0.01,
        ..SimConfig::reference()
    };
    let run = simulate_events(&config).expect("simulation");
    let stream = run.events.as_ref().expect("events kept");
    let n = write_time_tags(stream, BufWriter::new(File::create(&path).expect("create")))
        .expect("write");
    println!("wrote {n} events ({} bytes) to {path}", 9 * n);

    let tags = read_time_tags(BufReader::new(File::open(&path).expect("open"))).expect("read");
    for tag in [
        EventTag::SignalPhoton,
        EventTag::IdlerPhoton,
        EventTag::SignalDark,
        EventTag::IdlerDark,
        EventTag::Herald,
        EventTag::IdlerClick,
    ] {
        let k = tags.iter().filter(|(_, t)| *t == tag).count();
        println!("{tag:?}: {k}");
    }
    for (t, tag) in tags.iter().take(8) {
        println!("{:>14} ps  {tag:?}", t);
    }
}
