/// Indexed max-heap over variables keyed by activity. Ties go to the lower
/// variable index so branching is deterministic.
#[derive(Debug, Clone, Default)]
pub(crate) struct VarHeap {
    heap: Vec<u32>,
    // position of each var in `heap`, or usize::MAX when absent
    pos: Vec<usize>,
}

impl VarHeap {
    pub fn new(num_vars: u32) -> VarHeap {
        VarHeap {
            heap: Vec::with_capacity(num_vars as usize),
            pos: vec![usize::MAX; num_vars as usize + 1],
        }
    }

    pub fn contains(&self, var: u32) -> bool {
        self.pos[var as usize] != usize::MAX
    }

    fn better(activity: &[f64], a: u32, b: u32) -> bool {
        let (x, y) = (activity[a as usize], activity[b as usize]);
        x > y || (x == y && a < b)
    }

    pub fn insert(&mut self, var: u32, activity: &[f64]) {
        if self.contains(var) {
            return;
        }
        self.pos[var as usize] = self.heap.len();
        self.heap.push(var);
        self.sift_up(self.heap.len() - 1, activity);
    }

    /// Restores the heap property after `var`'s activity increased.
    pub fn increased(&mut self, var: u32, activity: &[f64]) {
        if let Some(&p) = self.pos.get(var as usize).filter(|&&p| p != usize::MAX) {
            self.sift_up(p, activity);
        }
    }

    pub fn pop(&mut self, activity: &[f64]) -> Option<u32> {
        let top = *self.heap.first()?;
        let last = self.heap.pop().expect("nonempty");
        self.pos[top as usize] = usize::MAX;
        if !self.heap.is_empty() {
            self.heap[0] = last;
            self.pos[last as usize] = 0;
            self.sift_down(0, activity);
        }
        Some(top)
    }

    fn sift_up(&mut self, mut i: usize, activity: &[f64]) {
        let v = self.heap[i];
        while i > 0 {
            let parent = (i - 1) / 2;
            let pv = self.heap[parent];
            if !Self::better(activity, v, pv) {
                break;
            }
            self.heap[i] = pv;
            self.pos[pv as usize] = i;
            i = parent;
        }
        self.heap[i] = v;
        self.pos[v as usize] = i;
    }

    fn sift_down(&mut self, mut i: usize, activity: &[f64]) {
        let v = self.heap[i];
        let len = self.heap.len();
        loop {
            let left = 2 * i + 1;
            if left >= len {
                break;
            }
            let right = left + 1;
            let child = if right < len && Self::better(activity, self.heap[right], self.heap[left]) {
                right
            } else {
                left
            };
            let cv = self.heap[child];
            if !Self::better(activity, cv, v) {
                break;
            }
            self.heap[i] = cv;
            self.pos[cv as usize] = i;
            i = child;
        }
        self.heap[i] = v;
        self.pos[v as usize] = i;
    }
}
