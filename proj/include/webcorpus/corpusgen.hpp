#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace webcorpus {

// Synthetic corpus parameters. Defaults produce the benchmark corpus:
// 10 domains x 20 URLs x 5 captures = 1000 records with bodies between
// 1 KB and 50 KB, spread over roughly ten months.
struct CorpusSpec {
    int domains = 10;
    int urls_per_domain = 20;
    int captures_per_url = 5;
    std::string period_begin = "20111203000000";  // inclusive, 14-digit
    std::string period_end = "20121009235959";    // inclusive
    std::uint64_t seed = 42;
    double chunked_fraction = 0.25;       // Transfer-Encoding: chunked
    double gzip_body_fraction = 0.25;     // Content-Encoding: gzip
    double non_html_fraction = 0.15;      // text/plain, application/json, image/png
    double error_status_fraction = 0.15;  // 404 / 500 instead of 200
    std::string needle = "internet";      // the content-filter marker term
    std::size_t min_body_bytes = 1024;
    std::size_t max_body_bytes = 50 * 1024;
    bool arc_flavor = false;  // write .arc.gz files instead of .warc.gz
};

// What the generator promised to write for one capture; the test oracle.
// terms lists the marker terms present in the body, sorted. digest hashes
// the body as transferred (after transfer decoding, before content
// decoding), matching the scan-side digest convention.
struct LedgerRow {
    std::string url;
    std::string timestamp;
    int status = 0;
    std::string mime;
    std::string title;             // empty for non-HTML captures
    std::vector<std::string> terms;
    std::string digest;

    // Not part of the CSV; kept for tests.
    bool chunked = false;
    bool gzip_encoded = false;
    std::string charset;  // "utf-8" or "iso-8859-1"
    std::string filename;
};

// Write the archive files plus ledger.csv into out_dir and return the
// ledger rows in generation order. Bit-reproducible for a fixed spec.
std::vector<LedgerRow> generate_corpus(const CorpusSpec& spec,
                                       const std::filesystem::path& out_dir);

void write_ledger_csv(const std::vector<LedgerRow>& rows,
                      const std::filesystem::path& path);
std::vector<LedgerRow> read_ledger_csv(const std::filesystem::path& path);

// Full scan of the given archives producing an 11-field CDX index: one
// row per response record, synthesized from the records themselves,
// sorted by (surt, timestamp). Writes a header line first.
void cdx_from_warc(const std::vector<std::filesystem::path>& archive_paths,
                   const std::filesystem::path& out_cdx);

}  // namespace webcorpus
