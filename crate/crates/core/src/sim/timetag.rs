//! Binary time-tag files: one 9-byte record per event, a little-endian
//! `u64` picosecond timestamp followed by a `u8` tag. Pair ids are not
//! stored.

use std::io::{self, Read, Write};

use super::engine::{Event, EventStream, EventTag};

pub const RECORD_BYTES: usize = 9;

pub fn write_time_tags<W: Write>(stream: &EventStream, mut w: W) -> io::Result<u64> {
    let mut n = 0;
    for e in &stream.events {
        let t = u64::try_from(e.time)
            .map_err(|_| io::Error::new(io::ErrorKind::InvalidData, "negative timestamp"))?;
        w.write_all(&t.to_le_bytes())?;
        w.write_all(&[e.tag as u8])?;
        n += 1;
    }
    w.flush()?;
    Ok(n)
}

pub fn read_time_tags<R: Read>(mut r: R) -> io::Result<Vec<(u64, EventTag)>> {
    let mut buf = Vec::new();
    r.read_to_end(&mut buf)?;
    if buf.len() % RECORD_BYTES != 0 {
        return Err(io::Error::new(
            io::ErrorKind::InvalidData,
            format!("{} bytes is not a whole number of records", buf.len()),
        ));
    }
    buf.chunks_exact(RECORD_BYTES)
        .map(|c| {
            let t = u64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
            let tag = EventTag::from_u8(c[8]).ok_or_else(|| {
                io::Error::new(io::ErrorKind::InvalidData, format!("unknown tag {}", c[8]))
            })?;
            Ok((t, tag))
        })
        .collect()
}

/// Events of one kind.
pub fn events_tagged(stream: &EventStream, tag: EventTag) -> impl Iterator<Item = &Event> {
    stream.events.iter().filter(move |e| e.tag == tag)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let stream = EventStream {
            events: vec![
                Event {
                    time: 5,
                    tag: EventTag::SignalPhoton,
                    pair: Some(1),
                },
                Event {
                    time: 1 << 40,
                    tag: EventTag::IdlerClick,
                    pair: None,
                },
            ],
        };
        let mut bytes = Vec::new();
        assert_eq!(write_time_tags(&stream, &mut bytes).unwrap(), 2);
        assert_eq!(bytes.len(), 18);
        assert_eq!(&bytes[..9], &[5, 0, 0, 0, 0, 0, 0, 0, 0]);
        let back = read_time_tags(&bytes[..]).unwrap();
        assert_eq!(
            back,
            vec![(5, EventTag::SignalPhoton), (1 << 40, EventTag::IdlerClick)]
        );
    }

    #[test]
    fn truncated_file_is_rejected() {
        assert!(read_time_tags(&[0u8; 10][..]).is_err());
        assert!(read_time_tags(&[0, 0, 0, 0, 0, 0, 0, 0, 99][..]).is_err());
    }
}
