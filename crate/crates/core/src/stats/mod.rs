//! Agreement distribution and proxy-variable association tests.

mod corr;
mod dist;
mod iaa;
mod proxy;
mod ttest;

pub use corr::{pearson, Correlation};
pub use dist::{betainc, student_t_two_sided};
pub use iaa::{iaa_histogram, IaaHistogram, BIN_LABELS};
pub use proxy::{
    format_p, proxy_analysis, proxy_label, read_proxies_csv, render_proxy_table, write_proxies_csv, write_proxy_table_csv,
    Association, ProxyRecord, ProxyRow, ALPHA,
};
pub use ttest::{ttest, ttest_independent, TTest, TTestKind};
