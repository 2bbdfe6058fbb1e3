use super::{InterfaceShape, MultipatchGeometry};
use std::io::{self, Write};

/// Plain-text dump of patches, interfaces and boundary faces.
pub fn write_geometry<W: Write>(g: &MultipatchGeometry, mut w: W) -> io::Result<()> {
    writeln!(w, "patches {}", g.n_patches())?;
    for (i, p) in g.patches().iter().enumerate() {
        writeln!(w, "patch {i} subdomain {}", g.subdomain_of(i))?;
        for (d, kv) in p.knots().iter().enumerate() {
            let knots: Vec<String> = kv.knots().iter().map(|k| format!("{k:.17e}")).collect();
            writeln!(w, "knots {d} degree {} {}", kv.degree(), knots.join(" "))?;
        }
        writeln!(w, "control {}", p.control().len())?;
        for (c, wt) in p.control().iter().zip(p.weights()) {
            writeln!(w, "{:.17e} {:.17e} {:.17e} {:.17e}", c[0], c[1], c[2], wt)?;
        }
    }
    for c in g.conforming() {
        let o = c.orientation;
        writeln!(
            w,
            "conforming {} {} {} {} {} {} swap={} flip_u={} flip_v={}",
            c.a.patch, c.a.side.dir, c.a.side.end, c.b.patch, c.b.side.dir, c.b.side.end, o.swap, o.flip_u, o.flip_v
        )?;
    }
    for (k, c) in g.couplings().iter().enumerate() {
        writeln!(w, "coupling {k} slave {} master {}", c.slave, c.master)?;
        for f in &c.slave_faces {
            writeln!(w, "slave_face {} {} {}", f.patch, f.side.dir, f.side.end)?;
        }
        for f in &c.master_faces {
            writeln!(w, "master_face {} {} {}", f.patch, f.side.dir, f.side.end)?;
        }
        for p in &c.pieces {
            writeln!(
                w,
                "piece {} {} map {} {} {} {} {} {}",
                p.slave_face,
                p.master_face,
                p.map.a[0][0],
                p.map.a[0][1],
                p.map.a[1][0],
                p.map.a[1][1],
                p.map.b[0],
                p.map.b[1]
            )?;
        }
        if let Some(pl) = &c.plane {
            let shape = match pl.shape {
                InterfaceShape::Rectangle { width, height } => format!("rectangle {width} {height}"),
                InterfaceShape::Disc { radius } => format!("disc {radius}"),
            };
            writeln!(
                w,
                "plane origin {} {} {} normal {} {} {} {shape}",
                pl.origin.x, pl.origin.y, pl.origin.z, pl.normal.x, pl.normal.y, pl.normal.z
            )?;
        }
    }
    for f in g.boundary() {
        writeln!(w, "boundary {} {} {}", f.patch, f.side.dir, f.side.end)?;
    }
    Ok(())
}
