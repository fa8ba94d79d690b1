use crate::error::{invalid, Error, Result};
use crate::extreal::ExtReal;
use crate::integrand::Integrand;
use crate::matspace::{Mat, MatBox};
use rayon::prelude::*;
use std::fmt::Write as _;

/// Extended-real values on the nodes of a [`MatBox`], in the box's
/// row-major enumeration order.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFn {
    bx: MatBox,
    values: Vec<ExtReal>,
}

impl GridFn {
    pub fn new(bx: MatBox, values: Vec<ExtReal>) -> Result<GridFn> {
        if values.len() != bx.point_count() {
            return Err(Error::Shape { expected: format!("{} values", bx.point_count()), got: values.len().to_string() });
        }
        Ok(GridFn { bx, values })
    }

    /// Samples `w` at every node.
    pub fn sample<W: Integrand + ?Sized>(w: &W, bx: &MatBox) -> Result<GridFn> {
        if w.dims() != bx.dims() {
            return Err(Error::Shape { expected: format!("{:?}", w.dims()), got: format!("{:?}", bx.dims()) });
        }
        let values = (0..bx.point_count())
            .into_par_iter()
            .map_init(|| bx.center.clone(), |f, i| {
                bx.fill_point(i, f);
                w.value(f)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(GridFn { bx: bx.clone(), values })
    }

    pub(crate) fn from_raw(bx: MatBox, raw: Vec<f64>) -> GridFn {
        GridFn { bx, values: raw.into_iter().map(ExtReal::saturating).collect() }
    }

    pub(crate) fn raw(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.value()).collect()
    }

    pub fn grid(&self) -> &MatBox {
        &self.bx
    }

    pub fn values(&self) -> &[ExtReal] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn finite_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_finite()).count()
    }

    /// Value at the grid node equal to `f`.
    pub fn at(&self, f: &Mat) -> Option<ExtReal> {
        self.bx.locate(f).map(|i| self.values[i])
    }

    /// Text form: a header `gridfn m N <res> <center> <half-widths>` with
    /// comma-separated lists, then one value per line (`inf` for `+inf`).
    pub fn to_text(&self) -> String {
        let (m, n) = self.bx.dims();
        let join = |v: Vec<String>| v.join(",");
        let mut s = format!(
            "gridfn {m} {n} {} {} {}\n",
            join(self.bx.resolution.iter().map(|r| r.to_string()).collect()),
            join(self.bx.center.as_slice().iter().map(|c| format!("{c:?}")).collect()),
            join(self.bx.half_widths.iter().map(|h| format!("{h:?}")).collect()),
        );
        for v in &self.values {
            s.push_str(&v.to_text());
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> Result<GridFn> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| invalid("empty gridfn text"))?;
        let parts: Vec<&str> = header.split_whitespace().collect();
        if parts.len() != 6 || parts[0] != "gridfn" {
            return Err(invalid("bad gridfn header"));
        }
        let num = |s: &str| s.parse::<usize>().map_err(|_| invalid(format!("bad integer `{s}`")));
        let floats = |s: &str| -> Result<Vec<f64>> {
            s.split(',').map(|x| x.parse::<f64>().map_err(|_| invalid(format!("bad number `{x}`")))).collect()
        };
        let (m, n) = (num(parts[1])?, num(parts[2])?);
        let res = parts[3].split(',').map(num).collect::<Result<Vec<_>>>()?;
        let center = Mat::new(m, n, floats(parts[4])?)?;
        let bx = MatBox::new(center, floats(parts[5])?, res)?;
        let values = lines
            .filter(|l| !l.trim().is_empty())
            .map(|l| ExtReal::parse_text(l.trim()).ok_or_else(|| invalid(format!("bad value `{l}`"))))
            .collect::<Result<Vec<_>>>()?;
        GridFn::new(bx, values)
    }

    /// CSV with one column per matrix entry (`f11`, `f12`, ...) and `value`.
    pub fn to_csv(&self) -> String {
        let (m, n) = self.bx.dims();
        let mut s = String::new();
        for i in 0..m {
            for j in 0..n {
                let _ = write!(s, "f{}{},", i + 1, j + 1);
            }
        }
        s.push_str("value\n");
        let mut f = self.bx.center.clone();
        for (idx, v) in self.values.iter().enumerate() {
            self.bx.fill_point(idx, &mut f);
            for x in f.as_slice() {
                let _ = write!(s, "{x:?},");
            }
            s.push_str(&v.to_text());
            s.push('\n');
        }
        s
    }
}
