/// Fixed-length bitset over element ranks.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Bitset {
    words: Vec<u64>,
    len: usize,
}

impl Bitset {
    pub fn new(len: usize) -> Self {
        Self { words: vec![0; len.div_ceil(64)], len }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        (self.words[i >> 6] >> (i & 63)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize) {
        self.words[i >> 6] |= 1 << (i & 63);
    }

    /// Sets bit `i`, returning whether it was previously clear.
    #[inline]
    pub fn insert(&mut self, i: usize) -> bool {
        let fresh = !self.get(i);
        self.set(i);
        fresh
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn or_assign(&mut self, other: &Bitset) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn and_assign(&mut self, other: &Bitset) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= b;
        }
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let tz = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(wi * 64 + tz)
                }
            })
        })
    }

    /// ORs `self` rotated left by `shift` positions (cyclic over `len`) into `dst`.
    pub fn rotate_or_into(&self, shift: usize, dst: &mut Bitset) {
        let n = self.len;
        let shift = shift % n;
        if shift == 0 {
            dst.or_assign(self);
            return;
        }
        self.shl_or_into(shift, dst);
        self.shr_or_into(n - shift, dst);
        dst.mask_tail();
    }

    fn shl_or_into(&self, s: usize, dst: &mut Bitset) {
        let (ws, bs) = (s / 64, s % 64);
        let nw = self.words.len();
        for i in 0..nw {
            let w = self.words[i];
            if w == 0 {
                continue;
            }
            if i + ws < nw {
                dst.words[i + ws] |= w << bs;
            }
            if bs > 0 && i + ws + 1 < nw {
                dst.words[i + ws + 1] |= w >> (64 - bs);
            }
        }
    }

    fn shr_or_into(&self, s: usize, dst: &mut Bitset) {
        let (ws, bs) = (s / 64, s % 64);
        let nw = self.words.len();
        for i in ws..nw {
            let w = self.words[i];
            if w == 0 {
                continue;
            }
            dst.words[i - ws] |= w >> bs;
            if bs > 0 && i > ws {
                dst.words[i - ws - 1] |= w << (64 - bs);
            }
        }
    }

    fn mask_tail(&mut self) {
        let rem = self.len % 64;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }
}
