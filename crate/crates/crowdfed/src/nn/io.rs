//! Flat binary parameter files.
//!
//! Layout, all little-endian:
//!
//! ```text
//! u64                  number of layer sizes S (= layer count + 1)
//! u64 × S              layer sizes, input first
//! f64 × P              parameters: for each layer, weights row-major
//!                      [out][in], then biases
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::network::{Layer, QNetwork};
use super::NnError;

impl QNetwork {
    pub fn write_to<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        let sizes = self.layer_sizes();
        w.write_all(&(sizes.len() as u64).to_le_bytes())?;
        for s in &sizes {
            w.write_all(&(*s as u64).to_le_bytes())?;
        }
        for layer in self.layers() {
            for value in layer.weights.iter().chain(&layer.biases) {
                w.write_all(&value.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self, NnError> {
        let count = read_u64(r)? as usize;
        if !(2..=64).contains(&count) {
            return Err(NnError::InvalidFormat(format!(
                "implausible layer-size count {count}"
            )));
        }
        let mut sizes = Vec::with_capacity(count);
        for _ in 0..count {
            let s = read_u64(r)? as usize;
            if s == 0 || s > 1 << 24 {
                return Err(NnError::InvalidFormat(format!("implausible layer size {s}")));
            }
            sizes.push(s);
        }
        let mut layers = Vec::with_capacity(count - 1);
        for w in sizes.windows(2) {
            let (in_dim, out_dim) = (w[0], w[1]);
            let mut weights = vec![0.0; in_dim * out_dim];
            let mut biases = vec![0.0; out_dim];
            for value in weights.iter_mut().chain(biases.iter_mut()) {
                *value = read_f64(r)?;
            }
            layers.push(Layer {
                weights,
                biases,
                in_dim,
                out_dim,
            });
        }
        let mut trailing = [0u8; 1];
        if r.read(&mut trailing)? != 0 {
            return Err(NnError::InvalidFormat(
                "trailing bytes after parameters".to_string(),
            ));
        }
        Ok(QNetwork::from_layers(layers))
    }

    pub fn save<P: AsRef<Path>>(&self, path: P) -> Result<(), NnError> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load<P: AsRef<Path>>(path: P) -> Result<Self, NnError> {
        let mut r = BufReader::new(File::open(path)?);
        Self::read_from(&mut r)
    }
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64, NnError> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(u64::from_le_bytes(buf))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64, NnError> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(f64::from_le_bytes(buf))
}
