//! Line-oriented text IO with strict UTF-8 validation.
//!
//! Readers report the byte offset of the first invalid UTF-8 sequence
//! instead of a bare decoding failure. Line terminators (`\n`, `\r\n`)
//! are stripped on read; writers emit `\n`.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Reads all lines from a reader, validating UTF-8 per line.
pub fn read_lines<R: BufRead>(mut reader: R) -> Result<Vec<String>> {
    let mut lines = Vec::new();
    let mut buf = Vec::new();
    let mut offset: u64 = 0;
    loop {
        buf.clear();
        let n = reader.read_until(b'\n', &mut buf)?;
        if n == 0 {
            break;
        }
        let mut end = buf.len();
        if end > 0 && buf[end - 1] == b'\n' {
            end -= 1;
        }
        if end > 0 && buf[end - 1] == b'\r' {
            end -= 1;
        }
        let line = std::str::from_utf8(&buf[..end]).map_err(|e| Error::InvalidUtf8 {
            offset: offset + e.valid_up_to() as u64,
        })?;
        lines.push(line.to_owned());
        offset += n as u64;
    }
    Ok(lines)
}

/// Reads all lines from a file path.
pub fn read_lines_path(path: impl AsRef<Path>) -> Result<Vec<String>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::file(path, e))?;
    read_lines(BufReader::new(file))
}

/// Writes lines to a writer, one per line.
pub fn write_lines<W: Write, S: AsRef<str>>(mut writer: W, lines: &[S]) -> Result<()> {
    for line in lines {
        writer.write_all(line.as_ref().as_bytes())?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

/// Writes lines to a file path.
pub fn write_lines_path<S: AsRef<str>>(path: impl AsRef<Path>, lines: &[S]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::file(path, e))?;
    let mut writer = std::io::BufWriter::new(file);
    write_lines(&mut writer, lines)?;
    writer.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    #[test]
    fn strips_line_endings() {
        let lines = read_lines(Cursor::new(b"a\nb\r\nc".to_vec())).unwrap();
        assert_eq!(lines, vec!["a", "b", "c"]);
    }

    #[test]
    fn reports_utf8_offset() {
        // "ab\n" then a lone continuation byte at offset 4.
        let err = read_lines(Cursor::new(vec![b'a', b'b', b'\n', b'x', 0x80, b'y'])).unwrap_err();
        match err {
            Error::InvalidUtf8 { offset } => assert_eq!(offset, 4),
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn empty_reader_yields_no_lines() {
        assert!(read_lines(Cursor::new(Vec::new())).unwrap().is_empty());
    }
}
