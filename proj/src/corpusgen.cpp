#include "webcorpus/corpusgen.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>

#include "webcorpus/cdx.hpp"
#include "webcorpus/errors.hpp"
#include "webcorpus/gzipio.hpp"
#include "webcorpus/hash.hpp"
#include "webcorpus/http.hpp"
#include "webcorpus/pipeline.hpp"
#include "webcorpus/warc.hpp"

namespace webcorpus {

namespace {

// Raw engine draws instead of std:: distributions: distribution output is
// implementation-defined, and corpus bytes must not depend on the stdlib.
std::uint64_t rand_below(std::mt19937_64& rng, std::uint64_t n) {
    return n == 0 ? 0 : rng() % n;
}

double rand_unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);
}

bool rand_chance(std::mt19937_64& rng, double p) { return rand_unit(rng) < p; }

const char* const kLexicon[] = {
    "archive",  "capture",  "crawler",  "document", "history",  "record",
    "request",  "response", "resource", "snapshot", "storage",  "timeline",
    "analysis", "corpus",   "dataset",  "digital",  "heritage", "index",
    "metadata", "mirror",   "network",  "preserve", "protocol", "research",
    "retrieve", "scholar",  "science",  "server",   "session",  "study",
    "borrow",   "cache",    "collect",  "curate",   "derive",   "extract",
    "filter",   "gather",   "inspect",  "measure",  "observe",  "process",
    "publish",  "quote",    "sample",   "select",   "trace",    "verify",
};
constexpr std::size_t kLexiconSize = sizeof(kLexicon) / sizeof(kLexicon[0]);

// Markers beside the configurable needle; fixed so the terms column stays
// meaningful across specs.
const char* const kExtraMarkers[] = {"library", "election"};

std::string pick_word(std::mt19937_64& rng, const std::vector<const char*>& lexicon) {
    return lexicon[rand_below(rng, lexicon.size())];
}

std::string sentence(std::mt19937_64& rng, const std::vector<const char*>& lexicon,
                     std::size_t words) {
    std::string out;
    for (std::size_t i = 0; i < words; ++i) {
        if (i) out.push_back(' ');
        out += pick_word(rng, lexicon);
    }
    return out;
}

std::string uuid4(std::mt19937_64& rng) {
    std::uint64_t hi = rng();
    std::uint64_t lo = rng();
    hi = (hi & 0xFFFFFFFFFFFF0FFFULL) | 0x0000000000004000ULL;  // version 4
    lo = (lo & 0x3FFFFFFFFFFFFFFFULL) | 0x8000000000000000ULL;  // variant 10
    char buf[37];
    std::snprintf(buf, sizeof(buf), "%08x-%04x-%04x-%04x-%012llx",
                  static_cast<unsigned>(hi >> 32), static_cast<unsigned>((hi >> 16) & 0xFFFF),
                  static_cast<unsigned>(hi & 0xFFFF), static_cast<unsigned>(lo >> 48),
                  static_cast<unsigned long long>(lo & 0xFFFFFFFFFFFFULL));
    return buf;
}

// "Sun, 17 Jan 2016 10:32:53 GMT" from a 14-digit timestamp.
std::string http_date(std::string_view ts14) {
    using namespace std::chrono;
    static const char* const kDays[] = {"Sun", "Mon", "Tue", "Wed", "Thu", "Fri", "Sat"};
    static const char* const kMonths[] = {"Jan", "Feb", "Mar", "Apr", "May", "Jun",
                                          "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};
    auto num = [&](std::size_t pos, std::size_t len) {
        int v = 0;
        for (std::size_t i = pos; i < pos + len; ++i) v = v * 10 + (ts14[i] - '0');
        return v;
    };
    const int y = num(0, 4), mo = num(4, 2), d = num(6, 2);
    const sys_days day = year{y} / mo / d;
    const unsigned wd = weekday{day}.c_encoding();
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%s, %02d %s %04d %02d:%02d:%02d GMT", kDays[wd], d,
                  kMonths[mo - 1], y, num(8, 2), num(10, 2), num(12, 2));
    return buf;
}

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out.push_back('"');
    return out;
}

struct BodyPlan {
    std::string mime;      // CDX-style, lowercased
    std::string charset;   // empty for binary
    std::string title;     // HTML only
    std::vector<std::string> terms;
    Bytes content;         // before content encoding
};

// Paragraph-shaped filler until the target size is reached, with marker
// sentences spliced in at deterministic spots.
std::vector<std::string> make_paragraphs(std::mt19937_64& rng,
                                         const std::vector<const char*>& lexicon,
                                         std::size_t target_bytes,
                                         const std::vector<std::string>& markers) {
    std::vector<std::string> paragraphs;
    std::size_t total = 0;
    while (total < target_bytes) {
        std::string p = sentence(rng, lexicon, 8 + rand_below(rng, 9));
        total += p.size() + 10;
        paragraphs.push_back(std::move(p));
    }
    for (const std::string& marker : markers) {
        const int copies = 1 + static_cast<int>(rand_below(rng, 3));
        for (int c = 0; c < copies; ++c) {
            std::string p = pick_word(rng, lexicon) + " " + marker + " " +
                            pick_word(rng, lexicon);
            paragraphs.insert(paragraphs.begin() + rand_below(rng, paragraphs.size() + 1),
                              std::move(p));
        }
    }
    return paragraphs;
}

BodyPlan plan_body(std::mt19937_64& rng, const CorpusSpec& spec,
                   const std::vector<const char*>& lexicon, const std::string& host,
                   int url_index, bool error_status) {
    BodyPlan plan;
    const std::size_t target =
        spec.min_body_bytes +
        rand_below(rng, spec.max_body_bytes - spec.min_body_bytes + 1);

    const bool non_html = rand_chance(rng, spec.non_html_fraction);
    std::string kind = "html";
    if (non_html) {
        const std::uint64_t pick = rand_below(rng, 3);
        kind = pick == 0 ? "plain" : pick == 1 ? "json" : "png";
    }

    if (kind != "png") {
        if (rand_chance(rng, 0.4)) plan.terms.push_back(spec.needle);
        for (const char* marker : kExtraMarkers)
            if (rand_chance(rng, 0.25)) plan.terms.push_back(marker);
        std::sort(plan.terms.begin(), plan.terms.end());
    }

    if (kind == "html") {
        plan.mime = "text/html";
        plan.charset = "utf-8";
        plan.title = "Page " + std::to_string(url_index) + " " +
                     sentence(rng, lexicon, 2 + rand_below(rng, 3)) + " " + host;
        std::string html = "<!DOCTYPE html>\n<html>\n<head>\n<title>" + plan.title +
                           "</title>\n</head>\n<body>\n<h1>" + plan.title + "</h1>\n";
        for (std::string& p : make_paragraphs(rng, lexicon, target, plan.terms))
            html += "<p>" + std::move(p) + "</p>\n";
        html += "</body>\n</html>\n";
        plan.content.assign(html.begin(), html.end());
    } else if (kind == "plain") {
        plan.mime = "text/plain";
        // Some plain-text captures carry Latin-1 accents to exercise the
        // charset handling end to end.
        const bool latin1 = rand_chance(rng, 0.3);
        plan.charset = latin1 ? "iso-8859-1" : "utf-8";
        std::string text;
        for (std::string& p : make_paragraphs(rng, lexicon, target, plan.terms))
            text += std::move(p) + "\n";
        if (latin1) text += "expos\xE9 caf\xE9 r\xE9sum\xE9\n";  // Latin-1 bytes
        plan.content.assign(text.begin(), text.end());
    } else if (kind == "json") {
        plan.mime = "application/json";
        plan.charset = "utf-8";
        std::string body = "{\n  \"page\": " + std::to_string(url_index) + ",\n  \"words\": [";
        bool first = true;
        for (std::string& p : make_paragraphs(rng, lexicon, target, plan.terms)) {
            if (!first) body += ", ";
            first = false;
            body += "\"" + std::move(p) + "\"";
        }
        body += "]\n}\n";
        plan.content.assign(body.begin(), body.end());
    } else {
        plan.mime = "image/png";
        static const std::uint8_t kPngMagic[] = {0x89, 0x50, 0x4E, 0x47, 0x0D, 0x0A, 0x1A, 0x0A};
        plan.content.assign(kPngMagic, kPngMagic + sizeof(kPngMagic));
        while (plan.content.size() < target)
            plan.content.push_back(static_cast<std::uint8_t>(rng() & 0xFF));
    }

    if (error_status && kind == "html") {
        // Error pages stay small and carry no markers.
        plan.terms.clear();
        plan.title = "Error " + host;
        std::string html = "<html>\n<head>\n<title>" + plan.title +
                           "</title>\n</head>\n<body>\n<p>" + sentence(rng, lexicon, 6) +
                           "</p>\n</body>\n</html>\n";
        plan.content.assign(html.begin(), html.end());
    }
    return plan;
}

}  // namespace

std::vector<LedgerRow> generate_corpus(const CorpusSpec& spec,
                                       const std::filesystem::path& out_dir) {
    if (spec.domains <= 0 || spec.urls_per_domain <= 0 || spec.captures_per_url <= 0)
        throw Error("corpus spec: counts must be positive");
    for (double f : {spec.chunked_fraction, spec.gzip_body_fraction, spec.non_html_fraction,
                     spec.error_status_fraction})
        if (f < 0.0 || f > 1.0) throw Error("corpus spec: fractions must be within [0,1]");
    if (!is_valid_timestamp14(spec.period_begin) || !is_valid_timestamp14(spec.period_end))
        throw Error("corpus spec: period bounds must be 14-digit timestamps");
    if (spec.min_body_bytes == 0 || spec.min_body_bytes > spec.max_body_bytes)
        throw Error("corpus spec: body size range is empty");
    const std::int64_t epoch_begin = timestamp14_to_epoch(spec.period_begin);
    const std::int64_t epoch_end = timestamp14_to_epoch(spec.period_end);
    if (epoch_begin > epoch_end) throw Error("corpus spec: period is empty");

    std::filesystem::create_directories(out_dir);
    std::mt19937_64 rng(spec.seed);

    // Words containing any marker would break the terms oracle.
    std::vector<const char*> lexicon;
    for (const char* word : kLexicon) {
        std::string_view w(word);
        bool clean = w.find(spec.needle) == std::string_view::npos;
        for (const char* marker : kExtraMarkers)
            if (w.find(marker) != std::string_view::npos) clean = false;
        if (clean) lexicon.push_back(word);
    }
    if (lexicon.empty()) throw Error("corpus spec: needle swallows the whole lexicon");

    std::vector<LedgerRow> ledger;
    ledger.reserve(static_cast<std::size_t>(spec.domains) * spec.urls_per_domain *
                   spec.captures_per_url);

    for (int d = 0; d < spec.domains; ++d) {
        char hostbuf[64];
        std::snprintf(hostbuf, sizeof(hostbuf), "site%02d.example", d);
        const std::string host = hostbuf;
        const std::string filename = host + (spec.arc_flavor ? ".arc.gz" : ".warc.gz");
        WarcWriter writer(out_dir / filename);

        if (spec.arc_flavor) {
            // ARC files open with a filedesc record; scans skip it.
            const std::string version_block =
                "1 0 webgen\nURL IP-address Archive-date Content-type Archive-length\n";
            const std::string head = "filedesc://" + filename + " 127.0.0.1 " +
                                     spec.period_begin + " text/plain " +
                                     std::to_string(version_block.size()) + "\n";
            Bytes block(head.begin(), head.end());
            block.insert(block.end(), version_block.begin(), version_block.end());
            writer.write_raw_block(block);
        }

        for (int u = 0; u < spec.urls_per_domain; ++u) {
            char pathbuf[32];
            std::snprintf(pathbuf, sizeof(pathbuf), "/page%02d", u);
            std::string path = pathbuf;
            if (u % 5 == 3) path += "?id=" + std::to_string(u);
            const std::string http_url = "http://" + host + path;

            // Distinct capture instants per URL, ascending.
            std::set<std::int64_t> instants;
            while (instants.size() < static_cast<std::size_t>(spec.captures_per_url))
                instants.insert(epoch_begin +
                                static_cast<std::int64_t>(rand_below(
                                    rng, static_cast<std::uint64_t>(epoch_end - epoch_begin + 1))));
            std::vector<std::int64_t> epochs(instants.begin(), instants.end());

            // Occasionally capture the https twin at the same instant as
            // its http sibling: same surt, equal timestamp, distinct URL.
            // That is the tie the latest-per-url rule has to break.
            int https_twin = -1;
            if (spec.captures_per_url >= 2 && rand_chance(rng, 0.12)) {
                https_twin = 1 + static_cast<int>(rand_below(
                                     rng, static_cast<std::uint64_t>(spec.captures_per_url - 1)));
                epochs[https_twin] = epochs[https_twin - 1];
            }

            for (int k = 0; k < spec.captures_per_url; ++k) {
                const std::string url =
                    (k == https_twin) ? "https://" + host + path : http_url;
                const std::string ts = epoch_to_timestamp14(epochs[k]);

                const bool error_status = rand_chance(rng, spec.error_status_fraction);
                BodyPlan body = plan_body(rng, spec, lexicon, host, u, error_status);
                const int status = error_status ? (rand_chance(rng, 0.5) ? 404 : 500) : 200;
                const char* reason = status == 200   ? "OK"
                                     : status == 404 ? "Not Found"
                                                     : "Internal Server Error";

                const bool gzip_encoded =
                    body.mime != "image/png" && rand_chance(rng, spec.gzip_body_fraction);
                const bool chunked = rand_chance(rng, spec.chunked_fraction);

                Bytes wire = body.content;
                if (gzip_encoded) wire = gzip_compress_member(wire);

                HttpResponse response;
                response.status = status;
                response.reason = reason;
                response.headers.add("Date", http_date(ts));
                response.headers.add("Server", "webgen/1.0");
                response.headers.add("Content-Type",
                                     body.charset.empty()
                                         ? body.mime
                                         : body.mime + "; charset=" + body.charset);
                if (gzip_encoded) response.headers.add("Content-Encoding", "gzip");
                if (chunked)
                    response.headers.add("Transfer-Encoding", "chunked");
                else
                    response.headers.add("Content-Length", std::to_string(wire.size()));
                response.body = wire;
                const Bytes message = serialize_http_response(response, chunked);

                // Drawn in both flavors so ARC and WARC corpora from one
                // seed stay capture-for-capture identical (twin oracle).
                const std::string record_id = uuid4(rng);
                if (spec.arc_flavor) {
                    const std::string head = url + " 127.0.0.1 " + ts + " " + body.mime + " " +
                                             std::to_string(message.size()) + "\n";
                    Bytes block(head.begin(), head.end());
                    block.insert(block.end(), message.begin(), message.end());
                    writer.write_raw_block(block);
                } else {
                    WarcRecord record;
                    record.headers.add("WARC-Type", "response");
                    record.headers.add("WARC-Record-ID", "<urn:uuid:" + record_id + ">");
                    record.headers.add("WARC-Date", timestamp14_to_warc_date(ts));
                    record.headers.add("WARC-Target-URI", url);
                    record.headers.add("Content-Type", "application/http; msgtype=response");
                    record.headers.add("Content-Length", std::to_string(message.size()));
                    record.payload = message;
                    writer.write(record);
                }

                LedgerRow row;
                row.url = url;
                row.timestamp = ts;
                row.status = status;
                row.mime = body.mime;
                row.title = body.mime == "text/html" ? body.title : "";
                row.terms = body.terms;
                row.digest = sha1_base32(wire.data(), wire.size());
                row.chunked = chunked;
                row.gzip_encoded = gzip_encoded;
                row.charset = body.charset;
                row.filename = filename;
                ledger.push_back(std::move(row));
            }
        }
        writer.close();
    }

    write_ledger_csv(ledger, out_dir / "ledger.csv");
    return ledger;
}

void write_ledger_csv(const std::vector<LedgerRow>& rows, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << "url,timestamp,status,mime,title,terms,digest\n";
    for (const LedgerRow& row : rows) {
        std::string terms;
        for (const std::string& term : row.terms) {
            if (!terms.empty()) terms.push_back(' ');
            terms += term;
        }
        out << csv_escape(row.url) << ',' << row.timestamp << ',' << row.status << ','
            << row.mime << ',' << csv_escape(row.title) << ',' << csv_escape(terms) << ','
            << row.digest << '\n';
    }
    if (!out) throw IoError("short write to " + path.string());
}

std::vector<LedgerRow> read_ledger_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::vector<LedgerRow> rows;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (first) {
            first = false;
            continue;
        }
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::string field;
        bool quoted = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            char c = line[i];
            if (quoted) {
                if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else if (c == '"') {
                    quoted = false;
                } else {
                    field.push_back(c);
                }
            } else if (c == '"' && field.empty()) {
                quoted = true;
            } else if (c == ',') {
                fields.push_back(std::move(field));
                field.clear();
            } else {
                field.push_back(c);
            }
        }
        fields.push_back(std::move(field));
        if (fields.size() != 7)
            throw FormatError(path.string() + ": ledger row with " +
                              std::to_string(fields.size()) + " fields");
        LedgerRow row;
        row.url = fields[0];
        row.timestamp = fields[1];
        row.status = std::stoi(fields[2]);
        row.mime = fields[3];
        row.title = fields[4];
        std::size_t begin = 0;
        while (begin < fields[5].size()) {
            std::size_t space = fields[5].find(' ', begin);
            std::size_t end = space == std::string::npos ? fields[5].size() : space;
            if (end > begin) row.terms.push_back(fields[5].substr(begin, end - begin));
            begin = end + 1;
        }
        row.digest = fields[6];
        rows.push_back(std::move(row));
    }
    return rows;
}

void cdx_from_warc(const std::vector<std::filesystem::path>& archive_paths,
                   const std::filesystem::path& out_cdx) {
    std::vector<CdxRecord> rows;
    for (const std::filesystem::path& path : archive_paths) {
        CountingFile file(path);
        scan_records(file, [&](const RecordLocator& locator, WarcRecord&& record) {
            if (auto type = record.headers.get("WARC-Type"); type && *type != "response")
                return;
            rows.push_back(synthesize_meta(locator, record));
        });
    }
    std::sort(rows.begin(), rows.end(), [](const CdxRecord& a, const CdxRecord& b) {
        return std::tie(a.surt_url, a.timestamp, a.filename, a.offset) <
               std::tie(b.surt_url, b.timestamp, b.filename, b.offset);
    });
    TextSink sink(out_cdx);
    sink.write(" CDX N b a m s k r M S V g\n");
    for (const CdxRecord& row : rows) {
        sink.write(write_cdx_line(row));
        sink.write("\n");
    }
    sink.close();
}

}  // namespace webcorpus
