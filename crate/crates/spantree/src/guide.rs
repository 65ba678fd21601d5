//! The guide chapters from `book/src/` compiled as doc-tests.
//!
//! mdbook cannot run Rust snippets against the crate, so each chapter is
//! included here as module documentation and `cargo test --doc` keeps the
//! book's code honest.

macro_rules! chapter {
    ($name:ident, $path:literal) => {
        #[doc = include_str!($path)]
        pub mod $name {}
    };
}

chapter!(introduction, "../../../book/src/introduction.md");
chapter!(graphs, "../../../book/src/graphs.md");
chapter!(expanders, "../../../book/src/expanders.md");
chapter!(generators, "../../../book/src/generators.md");
chapter!(trees, "../../../book/src/trees.md");
chapter!(embedding, "../../../book/src/embedding.md");
chapter!(games, "../../../book/src/games.md");
