use super::{CsrMatrix, Triplets};
use std::io::{self, BufRead, Write};

/// Writes a general real coordinate MatrixMarket file.
pub fn write_matrix_market<W: Write>(m: &CsrMatrix, mut w: W) -> io::Result<()> {
    writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(w, "{} {} {}", m.nrows(), m.ncols(), m.nnz())?;
    for i in 0..m.nrows() {
        let (c, v) = m.row(i);
        for (&j, &x) in c.iter().zip(v) {
            writeln!(w, "{} {} {:.17e}", i + 1, j + 1, x)?;
        }
    }
    Ok(())
}

/// Reads a real coordinate MatrixMarket file, general or symmetric.
pub fn read_matrix_market<R: BufRead>(r: R) -> io::Result<CsrMatrix> {
    let bad = |msg: &str| io::Error::new(io::ErrorKind::InvalidData, msg.to_string());
    let mut lines = r.lines();
    let header = lines.next().ok_or_else(|| bad("empty file"))??;
    let lower = header.to_lowercase();
    if !lower.starts_with("%%matrixmarket matrix coordinate real") {
        return Err(bad("unsupported MatrixMarket header"));
    }
    let symmetric = lower.contains("symmetric");
    let mut size: Option<(usize, usize)> = None;
    let mut t = Triplets::default();
    for line in lines {
        let line = line?;
        let s = line.trim();
        if s.is_empty() || s.starts_with('%') {
            continue;
        }
        let parts: Vec<&str> = s.split_whitespace().collect();
        match size {
            None => {
                if parts.len() != 3 {
                    return Err(bad("malformed size line"));
                }
                let nr = parts[0].parse().map_err(|_| bad("bad row count"))?;
                let nc = parts[1].parse().map_err(|_| bad("bad column count"))?;
                size = Some((nr, nc));
                t = Triplets::new(nr, nc);
            }
            Some((nr, nc)) => {
                if parts.len() != 3 {
                    return Err(bad("malformed entry"));
                }
                let i: usize = parts[0].parse().map_err(|_| bad("bad row index"))?;
                let j: usize = parts[1].parse().map_err(|_| bad("bad column index"))?;
                let v: f64 = parts[2].parse().map_err(|_| bad("bad value"))?;
                if i == 0 || j == 0 || i > nr || j > nc {
                    return Err(bad("index out of range"));
                }
                t.push(i - 1, j - 1, v);
                if symmetric && i != j {
                    t.push(j - 1, i - 1, v);
                }
            }
        }
    }
    if size.is_none() {
        return Err(bad("missing size line"));
    }
    Ok(t.to_csr())
}
