//! A cursor over fuzzer-supplied bytes. Every generator decision consumes at
//! least one byte while bytes remain; once the cursor is exhausted, every
//! choice takes the minimal alternative (index 0, false, …), which makes
//! generation total and gives minimization a clean suffix-trimming story.

/// Cursor over an input byte string.
#[derive(Debug, Clone)]
pub struct ByteCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> ByteCursor<'a> {
    pub fn new(bytes: &'a [u8]) -> Self {
        ByteCursor { bytes, pos: 0 }
    }

    pub fn exhausted(&self) -> bool {
        self.pos >= self.bytes.len()
    }

    /// Next byte; 0 once exhausted.
    pub fn byte(&mut self) -> u8 {
        match self.bytes.get(self.pos) {
            Some(b) => {
                self.pos += 1;
                *b
            }
            None => 0,
        }
    }

    /// Uniform-by-byte choice among `n` alternatives; exhaustion forces 0,
    /// so alternative 0 must be the minimal/terminal one.
    pub fn choose(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        usize::from(self.byte()) % n
    }

    /// Integer in `min..=max`.
    pub fn range(&mut self, min: usize, max: usize) -> usize {
        min + self.choose(max - min + 1)
    }

    pub fn flag(&mut self) -> bool {
        self.byte() & 1 == 1
    }

    /// True with probability 16/256 while bytes remain; never once
    /// exhausted.
    pub fn rare(&mut self) -> bool {
        if self.exhausted() {
            false
        } else {
            self.byte() < 16
        }
    }
}
