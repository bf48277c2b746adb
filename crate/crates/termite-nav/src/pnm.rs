//! Binary PGM (P5) and PPM (P6) images, 8 bits per sample.

use std::io::Write;

use termite_nav_core::terrain::HeightMap;

use crate::error::{Error, Result};

/// An RGB raster, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rgb {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<[u8; 3]>,
}

impl Rgb {
    pub fn filled(width: usize, height: usize, color: [u8; 3]) -> Self {
        Self {
            width,
            height,
            pixels: vec![color; width * height],
        }
    }

    pub fn put(&mut self, x: i64, y: i64, color: [u8; 3]) {
        if x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height {
            self.pixels[y as usize * self.width + x as usize] = color;
        }
    }

    pub fn get(&self, x: usize, y: usize) -> [u8; 3] {
        self.pixels[y * self.width + x]
    }
}

struct Header {
    magic: [u8; 2],
    width: usize,
    height: usize,
    maxval: u32,
    data_start: usize,
}

fn parse_header(bytes: &[u8]) -> Result<Header> {
    if bytes.len() < 2 {
        return Err(Error::malformed("image", "file too short for a header"));
    }
    let magic = [bytes[0], bytes[1]];
    let mut pos = 2;
    let mut fields = [0u64; 3];
    for field in &mut fields {
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                _ => break,
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        if start == pos {
            return Err(Error::malformed("image", "expected an unsigned integer in the header"));
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::malformed("image", "header integer out of range"))?;
    }
    if !bytes.get(pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(Error::malformed("image", "missing whitespace after maxval"));
    }
    let [width, height, maxval] = fields;
    if width == 0 || height == 0 {
        return Err(Error::malformed("image", "zero width or height"));
    }
    Ok(Header {
        magic,
        width: width as usize,
        height: height as usize,
        maxval: u32::try_from(maxval).unwrap_or(u32::MAX),
        data_start: pos + 1,
    })
}

/// Decodes an 8-bit binary PGM into a heightmap.
pub fn read_pgm(bytes: &[u8]) -> Result<HeightMap> {
    let h = parse_header(bytes)?;
    match &h.magic {
        b"P5" => {}
        b"P6" => return Err(Error::malformed("PGM", "color PPM (P6) images are not heightmaps")),
        m => return Err(Error::malformed("PGM", format!("bad magic {:?}", String::from_utf8_lossy(m)))),
    }
    if h.maxval != 255 {
        return Err(Error::OutOfRangeDepth(h.maxval));
    }
    let n = h
        .width
        .checked_mul(h.height)
        .ok_or_else(|| Error::malformed("PGM", "dimensions overflow"))?;
    let data = bytes
        .get(h.data_start..h.data_start + n)
        .ok_or_else(|| Error::malformed("PGM", format!("expected {n} pixel bytes")))?;
    Ok(HeightMap::new(h.width, h.height, data.to_vec())?)
}

/// Decodes an 8-bit binary PPM.
pub fn read_ppm(bytes: &[u8]) -> Result<Rgb> {
    let h = parse_header(bytes)?;
    if &h.magic != b"P6" {
        return Err(Error::malformed("PPM", "bad magic"));
    }
    if h.maxval != 255 {
        return Err(Error::OutOfRangeDepth(h.maxval));
    }
    let n = h.width * h.height * 3;
    let data = bytes
        .get(h.data_start..h.data_start + n)
        .ok_or_else(|| Error::malformed("PPM", format!("expected {n} sample bytes")))?;
    Ok(Rgb {
        width: h.width,
        height: h.height,
        pixels: data.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect(),
    })
}

pub fn encode_pgm(width: usize, height: usize, values: &[u8]) -> Vec<u8> {
    assert_eq!(values.len(), width * height, "pixel count must match dimensions");
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend_from_slice(values);
    out
}

pub fn encode_ppm(img: &Rgb) -> Vec<u8> {
    let mut out = Vec::with_capacity(img.pixels.len() * 3 + 20);
    write!(out, "P6\n{} {}\n255\n", img.width, img.height).expect("writing to a Vec cannot fail");
    for px in &img.pixels {
        out.extend_from_slice(px);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two() {
        let bytes = encode_pgm(2, 2, &[0, 255, 0, 255]);
        let hm = read_pgm(&bytes).unwrap();
        assert_eq!((hm.width(), hm.height()), (2, 2));
        assert_eq!(hm.values(), &[0, 255, 0, 255]);
    }

    #[test]
    fn comments_in_header() {
        let mut bytes = b"P5\n# made by hand\n3 1 # trailing\n255\n".to_vec();
        bytes.extend_from_slice(&[1, 2, 3]);
        assert_eq!(read_pgm(&bytes).unwrap().values(), &[1, 2, 3]);
    }

    #[test]
    fn sixteen_bit_rejected() {
        let mut bytes = b"P5 1 1 65535\n".to_vec();
        bytes.extend_from_slice(&[0, 0]);
        assert!(matches!(read_pgm(&bytes), Err(Error::OutOfRangeDepth(65535))));
    }

    #[test]
    fn bad_inputs() {
        assert!(matches!(read_pgm(b"P2 1 1 255\n0"), Err(Error::MalformedFormat { .. })));
        assert!(matches!(read_pgm(b"P6 1 1 255\n\0\0\0"), Err(Error::MalformedFormat { .. })));
        assert!(matches!(read_pgm(b"P5 0 1 255\n"), Err(Error::MalformedFormat { .. })));
        assert!(matches!(read_pgm(b"P5 2 2 255\n\0"), Err(Error::MalformedFormat { .. })));
        assert!(matches!(read_pgm(b"P5 x"), Err(Error::MalformedFormat { .. })));
    }

    #[test]
    fn ppm_round_trip() {
        let mut img = Rgb::filled(3, 2, [1, 2, 3]);
        img.put(2, 1, [9, 8, 7]);
        img.put(-1, 0, [0, 0, 0]);
        assert_eq!(read_ppm(&encode_ppm(&img)).unwrap(), img);
    }
}
