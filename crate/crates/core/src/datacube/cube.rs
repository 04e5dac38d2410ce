use std::io::{self, Read, Write};

use ndarray::Array3;
use rustfft::num_complex::Complex64;

use super::params::RadarParams;
use crate::error::{Error, Result};

/// Magic bytes opening every cube record.
pub const CUBE_MAGIC: [u8; 4] = *b"GTRK";
pub const CUBE_VERSION: u32 = 1;
pub const CUBE_HEADER_LEN: usize = 64;

/// Complex baseband samples of one frame, shape `(sample, chirp, channel)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadarCube {
    pub data: Array3<Complex64>,
    pub frame_index: u64,
    pub params: RadarParams,
}

impl RadarCube {
    pub fn new(data: Array3<Complex64>, frame_index: u64, params: RadarParams) -> Result<Self> {
        let cube = Self { data, frame_index, params };
        cube.validate()?;
        Ok(cube)
    }

    pub fn zeros(params: RadarParams, frame_index: u64) -> Self {
        let shape = (params.samples_per_chirp, params.chirps_per_frame, params.n_virtual_channels);
        Self {
            data: Array3::zeros(shape),
            frame_index,
            params,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        let expected = [self.params.samples_per_chirp, self.params.chirps_per_frame, self.params.n_virtual_channels];
        if self.data.shape() != expected {
            return Err(Error::Shape(format!("cube shape {:?} does not match params {:?}", self.data.shape(), expected)));
        }
        if let Some((idx, _)) = self.data.indexed_iter().find(|(_, v)| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::NonFinite(format!(
                "frame {} (sample {}, chirp {}, channel {})",
                self.frame_index, idx.0, idx.1, idx.2
            )));
        }
        Ok(())
    }

    /// Writes one record: 64-byte header, then complex32 samples with the
    /// channel index varying fastest.
    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<()> {
        let p = &self.params;
        let mut header = [0u8; CUBE_HEADER_LEN];
        header[0..4].copy_from_slice(&CUBE_MAGIC);
        header[4..8].copy_from_slice(&CUBE_VERSION.to_le_bytes());
        header[8..12].copy_from_slice(&to_u32(p.samples_per_chirp)?.to_le_bytes());
        header[12..16].copy_from_slice(&to_u32(p.chirps_per_frame)?.to_le_bytes());
        header[16..20].copy_from_slice(&to_u32(p.n_virtual_channels)?.to_le_bytes());
        let frame = u32::try_from(self.frame_index).map_err(|_| Error::Format("frame index exceeds u32".into()))?;
        header[20..24].copy_from_slice(&frame.to_le_bytes());
        header[24..32].copy_from_slice(&p.carrier_frequency.to_le_bytes());
        header[32..40].copy_from_slice(&p.sweep_bandwidth.to_le_bytes());
        header[40..48].copy_from_slice(&p.chirp_repetition_interval.to_le_bytes());
        header[48..52].copy_from_slice(&(p.frame_rate as f32).to_le_bytes());
        header[52..56].copy_from_slice(&(p.element_spacing as f32).to_le_bytes());
        header[56..60].copy_from_slice(&(p.adc_sample_rate as f32).to_le_bytes());
        header[60..64].copy_from_slice(&(p.beamwidth_deg as f32).to_le_bytes());
        w.write_all(&header)?;

        let mut body = Vec::with_capacity(self.data.len() * 8);
        // Standard layout already iterates (sample, chirp, channel) with channel fastest.
        for v in self.data.iter() {
            body.extend_from_slice(&(v.re as f32).to_le_bytes());
            body.extend_from_slice(&(v.im as f32).to_le_bytes());
        }
        w.write_all(&body)?;
        Ok(())
    }

    /// Reads the next record; `Ok(None)` at a clean end of stream.
    pub fn read_from<R: Read>(r: &mut R) -> Result<Option<Self>> {
        let mut header = [0u8; CUBE_HEADER_LEN];
        match read_full(r, &mut header)? {
            0 => return Ok(None),
            n if n < CUBE_HEADER_LEN => return Err(Error::Format(format!("truncated header ({n} bytes)"))),
            _ => {}
        }
        if header[0..4] != CUBE_MAGIC {
            return Err(Error::Format("bad magic".into()));
        }
        let u32_at = |o: usize| u32::from_le_bytes(header[o..o + 4].try_into().unwrap());
        let f64_at = |o: usize| f64::from_le_bytes(header[o..o + 8].try_into().unwrap());
        let f32_at = |o: usize| f32::from_le_bytes(header[o..o + 4].try_into().unwrap()) as f64;
        let version = u32_at(4);
        if version != CUBE_VERSION {
            return Err(Error::Format(format!("unsupported version {version}")));
        }
        let params = RadarParams {
            samples_per_chirp: u32_at(8) as usize,
            chirps_per_frame: u32_at(12) as usize,
            n_virtual_channels: u32_at(16) as usize,
            carrier_frequency: f64_at(24),
            sweep_bandwidth: f64_at(32),
            chirp_repetition_interval: f64_at(40),
            frame_rate: f32_at(48),
            element_spacing: f32_at(52),
            adc_sample_rate: f32_at(56),
            beamwidth_deg: f32_at(60),
        };
        params.validate()?;
        let frame_index = u32_at(20) as u64;

        let n = params.cube_len();
        let mut body = vec![0u8; n * 8];
        if read_full(r, &mut body)? != body.len() {
            return Err(Error::Format("truncated sample block".into()));
        }
        let samples: Vec<Complex64> = body
            .chunks_exact(8)
            .map(|c| {
                let re = f32::from_le_bytes(c[0..4].try_into().unwrap());
                let im = f32::from_le_bytes(c[4..8].try_into().unwrap());
                Complex64::new(re as f64, im as f64)
            })
            .collect();
        let shape = (params.samples_per_chirp, params.chirps_per_frame, params.n_virtual_channels);
        let data = Array3::from_shape_vec(shape, samples).map_err(|e| Error::Format(e.to_string()))?;
        Self::new(data, frame_index, params).map(Some)
    }
}

fn to_u32(v: usize) -> Result<u32> {
    u32::try_from(v).map_err(|_| Error::Format(format!("dimension {v} exceeds u32")))
}

fn read_full<R: Read>(r: &mut R, buf: &mut [u8]) -> io::Result<usize> {
    let mut filled = 0;
    while filled < buf.len() {
        match r.read(&mut buf[filled..]) {
            Ok(0) => break,
            Ok(n) => filled += n,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(filled)
}

/// Iterator over the cube records of a stream.
pub struct CubeReader<R> {
    inner: R,
}

impl<R: Read> CubeReader<R> {
    pub fn new(inner: R) -> Self {
        Self { inner }
    }
}

impl<R: Read> Iterator for CubeReader<R> {
    type Item = Result<RadarCube>;

    fn next(&mut self) -> Option<Self::Item> {
        RadarCube::read_from(&mut self.inner).transpose()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_params() -> RadarParams {
        RadarParams {
            samples_per_chirp: 4,
            chirps_per_frame: 3,
            n_virtual_channels: 2,
            ..RadarParams::default()
        }
    }

    #[test]
    fn header_layout_is_fixed() {
        let p = small_params();
        let mut cube = RadarCube::zeros(p, 7);
        cube.data[[1, 2, 1]] = Complex64::new(1.5, -2.0);
        let mut buf = Vec::new();
        cube.write_to(&mut buf).unwrap();
        assert_eq!(buf.len(), CUBE_HEADER_LEN + 4 * 3 * 2 * 8);
        assert_eq!(&buf[0..4], b"GTRK");
        assert_eq!(u32::from_le_bytes(buf[8..12].try_into().unwrap()), 4);
        assert_eq!(u32::from_le_bytes(buf[20..24].try_into().unwrap()), 7);
        // (sample 1, chirp 2, channel 1) with channel fastest.
        let offset = CUBE_HEADER_LEN + ((1 * 3 + 2) * 2 + 1) * 8;
        assert_eq!(f32::from_le_bytes(buf[offset..offset + 4].try_into().unwrap()), 1.5);
        assert_eq!(f32::from_le_bytes(buf[offset + 4..offset + 8].try_into().unwrap()), -2.0);
    }

    #[test]
    fn stream_of_records_round_trips() {
        let p = small_params();
        let mut a = RadarCube::zeros(p, 0);
        a.data[[0, 0, 0]] = Complex64::new(0.25, 0.5);
        let mut b = RadarCube::zeros(p, 1);
        b.data[[3, 2, 1]] = Complex64::new(-1.0, 2.0);
        let mut buf = Vec::new();
        a.write_to(&mut buf).unwrap();
        b.write_to(&mut buf).unwrap();
        let back: Vec<RadarCube> = CubeReader::new(&buf[..]).collect::<Result<_>>().unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[0].data, a.data);
        assert_eq!(back[1].data, b.data);
        assert_eq!(back[1].frame_index, 1);
        assert_eq!(back[0].params.carrier_frequency, 24.0e9);
    }

    #[test]
    fn rejects_truncation_and_bad_magic() {
        let cube = RadarCube::zeros(small_params(), 0);
        let mut buf = Vec::new();
        cube.write_to(&mut buf).unwrap();
        assert!(RadarCube::read_from(&mut &buf[..buf.len() - 1]).is_err());
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(RadarCube::read_from(&mut &bad[..]).is_err());
    }

    #[test]
    fn rejects_non_finite() {
        let mut cube = RadarCube::zeros(small_params(), 0);
        cube.data[[0, 1, 0]] = Complex64::new(f64::NAN, 0.0);
        assert!(matches!(cube.validate(), Err(Error::NonFinite(_))));
    }
}
