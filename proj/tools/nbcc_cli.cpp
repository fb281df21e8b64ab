// nbcc: one-memory recursive systematic convolutional codes over GF(q) on
// q-ary QAM — field tables, encoding, distance spectra, code search,
// max-log-MAP decoding, Monte Carlo error rates, and CM/BICM capacity.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <nbcc/capacity.hpp>
#include <nbcc/channel_sim.hpp>
#include <nbcc/code.hpp>
#include <nbcc/decoder.hpp>
#include <nbcc/gf.hpp>
#include <nbcc/mapping.hpp>
#include <nbcc/search.hpp>
#include <nbcc/spectrum.hpp>

using nlohmann::json;

namespace {

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

// "a:step:b" inclusive sweep, or a single value
std::vector<double> parse_sweep(const std::string& spec) {
    std::vector<double> out;
    const size_t c1 = spec.find(':');
    if (c1 == std::string::npos) {
        out.push_back(std::stod(spec));
        return out;
    }
    const size_t c2 = spec.find(':', c1 + 1);
    if (c2 == std::string::npos)
        throw std::invalid_argument("sweep must be 'value' or 'start:step:stop'");
    const double start = std::stod(spec.substr(0, c1));
    const double step = std::stod(spec.substr(c1 + 1, c2 - c1 - 1));
    const double stop = std::stod(spec.substr(c2 + 1));
    if (step <= 0.0) throw std::invalid_argument("sweep step must be positive");
    if (stop < start) throw std::invalid_argument("sweep stop must be >= start");
    for (double v = start; v <= stop + step * 1e-9; v += step) out.push_back(v);
    return out;
}

std::ostream& open_out(std::ofstream& file, const std::string& path) {
    if (path.empty()) return std::cout;
    file.open(path);
    if (!file) throw std::runtime_error("cannot open output file: " + path);
    return file;
}

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    json j;
    in >> j;
    return j;
}

nbcc::FieldSpec field_from_json(const json& j) {
    return nbcc::build_field(j.at("m").get<int>(), j.at("poly").get<int>());
}

struct CodeSetup {
    nbcc::FieldSpec field;
    nbcc::CodeCoefficients code;
    json config; // resolved descriptor for output echo
};

// either a code.json descriptor or the --q/--a1/--a2/--a3 shorthand with the
// embedded default field for that order
CodeSetup resolve_code(const std::string& code_path, int q, int a1, int a2, int a3) {
    CodeSetup s;
    if (!code_path.empty()) {
        const json j = load_json(code_path);
        s.field = field_from_json(j.at("field"));
        s.code = {j.at("a1").get<int>(), j.at("a2").get<int>(), j.at("a3").get<int>()};
    } else {
        if (q == 0) throw std::invalid_argument("need --code or --q with --a1/--a2/--a3");
        s.field = nbcc::field_for_q(q);
        s.code = {a1, a2, a3};
    }
    try {
        nbcc::validate_code(s.field, s.code);
    } catch (const std::invalid_argument&) {
        if (s.field.add(s.field.mul(s.code.a1, s.code.a2), s.code.a3) == 0)
            throw std::invalid_argument("invalid code: a1*a2+a3 == 0");
        throw;
    }
    s.config = {{"field", {{"m", s.field.m}, {"poly", s.field.poly}}},
                {"a1", s.code.a1},
                {"a2", s.code.a2},
                {"a3", s.code.a3}};
    return s;
}

std::vector<int> read_symbols(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::vector<int> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        for (char& ch : line)
            if (ch == ',' || ch == ';') ch = ' ';
        std::istringstream ls(line);
        int v;
        while (ls >> v) out.push_back(v);
    }
    return out;
}

int run_field_info(int m, int poly, const std::string& out_path, const std::string& format) {
    const nbcc::FieldSpec f = nbcc::build_field(m, poly);
    std::ofstream file;
    std::ostream& os = open_out(file, out_path);
    if (format == "json") {
        json j{{"m", f.m}, {"poly", f.poly}, {"q", f.q}};
        for (int i = 0; i < f.q - 1; ++i) j["antilog"].push_back(f.antilog_table[i]);
        j["log"].push_back(nullptr); // log(0) undefined
        for (int v = 1; v < f.q; ++v) j["log"].push_back(f.log_table[v]);
        os << j.dump(2) << "\n";
        return 0;
    }
    os << "# config: " << json{{"m", f.m}, {"poly", f.poly}, {"q", f.q}}.dump() << "\n";
    os << "index,antilog,value,log\n";
    for (int i = 0; i < f.q - 1; ++i)
        os << i << ',' << f.antilog_table[i] << ',' << (i + 1) << ',' << f.log_table[i + 1]
           << "\n";
    return 0;
}

int run_constellation(int q, const std::string& out_path, const std::string& format) {
    const nbcc::Constellation cs = nbcc::build_qam(q);
    const int m = q == 4 ? 2 : (q == 16 ? 4 : 6);
    const double norm = std::sqrt(static_cast<double>(cs.scale_sq));
    std::ofstream file;
    std::ostream& os = open_out(file, out_path);
    auto bits = [&](int v) {
        std::string s(m, '0');
        for (int k = 0; k < m; ++k)
            if (v >> (m - 1 - k) & 1) s[k] = '1';
        return s;
    };
    if (format == "json") {
        json j{{"q", q}, {"scale_sq", cs.scale_sq}};
        for (int v = 0; v < q; ++v)
            j["points"].push_back({{"symbol", v},
                                   {"bits", bits(v)},
                                   {"i", cs.sym_i(v)},
                                   {"q", cs.sym_q(v)}});
        os << j.dump(2) << "\n";
        return 0;
    }
    os << "# config: " << json{{"q", q}, {"scale_sq", cs.scale_sq}}.dump() << "\n";
    os << "symbol,bits,i,q,norm_i,norm_q\n";
    for (int v = 0; v < q; ++v)
        os << v << ',' << bits(v) << ',' << cs.sym_i(v) << ',' << cs.sym_q(v) << ','
           << fmt_double(cs.sym_i(v) / norm) << ',' << fmt_double(cs.sym_q(v) / norm) << "\n";
    return 0;
}

int run_encode(const CodeSetup& s, const std::string& in_path, bool terminate,
               const std::string& out_path) {
    const std::vector<int> inputs = read_symbols(in_path);
    if (inputs.empty()) throw std::invalid_argument("no input symbols in " + in_path);
    for (int v : inputs)
        if (v < 0 || v >= s.field.q)
            throw std::invalid_argument("input symbol out of range: " + std::to_string(v));
    const nbcc::EncodedFrame enc = nbcc::encode_frame(s.field, s.code, inputs, terminate);
    std::ofstream file;
    std::ostream& os = open_out(file, out_path);
    json cfg = s.config;
    cfg["terminate"] = terminate;
    os << "# config: " << cfg.dump() << "\n";
    os << "stage,input,systematic,parity\n";
    for (size_t i = 0; i < enc.systematic.size(); ++i)
        os << i << ',' << enc.systematic[i] << ',' << enc.systematic[i] << ','
           << enc.parity[i] << "\n";
    return 0;
}

int run_decode(const CodeSetup& s, const std::string& in_path, double snr_db, bool terminated,
               const std::string& out_path) {
    std::ifstream in(in_path);
    if (!in) throw std::runtime_error("cannot open file: " + in_path);
    std::vector<nbcc::ChannelObservation> obs;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        for (char& ch : line)
            if (ch == ',') ch = ' ';
        std::istringstream ls(line);
        int stage;
        nbcc::ChannelObservation o;
        if (ls >> stage >> o.sys_i >> o.sys_q >> o.par_i >> o.par_q) obs.push_back(o);
    }
    if (obs.empty()) throw std::invalid_argument("no observations in " + in_path);
    const nbcc::Constellation cs = nbcc::build_qam(s.field.q);
    const nbcc::Trellis tr = nbcc::build_trellis(s.field, s.code);
    const double sigma2 = std::pow(10.0, -snr_db / 10.0) / 2.0;
    const nbcc::BranchMetrics bm = nbcc::branch_metrics(obs, tr, cs, sigma2);
    nbcc::DecodeOptions opt;
    opt.termination = terminated ? nbcc::Termination::terminated : nbcc::Termination::open;
    const nbcc::SymbolPosteriors post = nbcc::max_log_map_decode(tr, bm, opt);
    std::ofstream file;
    std::ostream& os = open_out(file, out_path);
    json cfg = s.config;
    cfg["snr_db"] = snr_db;
    cfg["terminated"] = terminated;
    os << "# config: " << cfg.dump() << "\n";
    os << "stage,decision,posterior\n";
    for (int i = 0; i < post.stages; ++i)
        os << i << ',' << post.hard[i] << ',' << fmt_double(post.l(i, post.hard[i])) << "\n";
    return 0;
}

int run_spectrum(const CodeSetup& s, bool ordered, int threads, const std::string& out_path,
                 const std::string& format) {
    const nbcc::Constellation cs = nbcc::build_qam(s.field.q);
    const nbcc::Trellis tr = nbcc::build_trellis(s.field, s.code);
    nbcc::SpectrumOptions opt;
    opt.threads = threads;
    opt.ordered_convention = ordered;
    const nbcc::DistanceSpectrum sp = nbcc::compute_spectrum(tr, cs, opt);
    std::fprintf(stdout, "d1^2=%.2f (%lld/%d) n1=%llu  d2^2=%.2f (%lld/%d) n2=%llu  [%s]\n",
                 sp.d1_sq(), sp.d1_num, sp.scale_sq, (unsigned long long)sp.n1, sp.d2_sq(),
                 sp.d2_num, sp.scale_sq, (unsigned long long)sp.n2, sp.convention.c_str());
    if (out_path.empty() && format != "json") return 0;
    json j{{"config", s.config},      {"d1_num", sp.d1_num}, {"d2_num", sp.d2_num},
           {"scale_sq", sp.scale_sq}, {"n1", sp.n1},         {"n2", sp.n2},
           {"convention", sp.convention}};
    if (!out_path.empty()) {
        std::ofstream file;
        open_out(file, out_path) << j.dump(2) << "\n";
    } else {
        std::cout << j.dump(2) << "\n";
    }
    return 0;
}

int run_search(int q, int top, int threads, const std::string& out_path,
               const std::string& format) {
    const nbcc::FieldSpec f = nbcc::field_for_q(q);
    const nbcc::Constellation cs = nbcc::build_qam(q);
    nbcc::SearchOptions opt;
    opt.top = top;
    opt.threads = threads;
    const nbcc::SearchReport rep = nbcc::search_codes(f, cs, opt);
    std::ofstream file;
    std::ostream& os = open_out(file, out_path);
    if (format == "csv") {
        os << "# config: "
           << json{{"q", q}, {"top", top}, {"total_codes", rep.total_codes},
                   {"evaluated", rep.evaluated}}
                  .dump()
           << "\n";
        os << "a1,a2,a3,d1_num,n1,d2_num,n2,scale_sq\n";
        for (const auto& e : rep.ranked)
            os << e.code.a1 << ',' << e.code.a2 << ',' << e.code.a3 << ',' << e.spectrum.d1_num
               << ',' << e.spectrum.n1 << ',' << e.spectrum.d2_num << ',' << e.spectrum.n2
               << ',' << e.spectrum.scale_sq << "\n";
        return 0;
    }
    json j{{"config", {{"q", q}, {"top", top}, {"threads", threads}}},
          {"total_codes", rep.total_codes},
          {"evaluated", rep.evaluated},
          {"elapsed_seconds", rep.elapsed_seconds},
          {"results", json::array()}};
    for (const auto& e : rep.ranked)
        j["results"].push_back({{"a1", e.code.a1},
                                {"a2", e.code.a2},
                                {"a3", e.code.a3},
                                {"d1_num", e.spectrum.d1_num},
                                {"n1", e.spectrum.n1},
                                {"d2_num", e.spectrum.d2_num},
                                {"n2", e.spectrum.n2},
                                {"scale_sq", e.spectrum.scale_sq}});
    os << j.dump(2) << "\n";
    return 0;
}

int run_simulate(const CodeSetup& s, const std::string& mod, const std::string& sweep_spec,
                 int frame_len, double frames_max, double ferr_min, std::uint64_t seed,
                 int threads, bool terminate, const std::string& out_path,
                 const std::string& format) {
    const std::vector<double> sweep = parse_sweep(sweep_spec);
    nbcc::SimOptions opt;
    opt.frame_len = frame_len;
    opt.stop.max_frames = static_cast<unsigned long long>(frames_max);
    opt.stop.min_frame_errors = static_cast<unsigned long long>(ferr_min);
    opt.seed = seed;
    opt.threads = threads;
    opt.terminate = terminate;
    if (mod == "bpsk")
        opt.modulation = nbcc::Modulation::bpsk;
    else if (mod != "qam")
        throw std::invalid_argument("--mod must be qam or bpsk");
    const nbcc::Constellation cs = nbcc::build_qam(s.field.q);
    const nbcc::SimReport rep = nbcc::run_monte_carlo(s.field, s.code, cs, sweep, opt);

    json cfg = s.config;
    cfg["mod"] = mod;
    cfg["frame_len"] = frame_len;
    cfg["frames_max"] = opt.stop.max_frames;
    cfg["ferr_min"] = opt.stop.min_frame_errors;
    cfg["seed"] = seed;
    cfg["terminate"] = terminate;

    std::ofstream file;
    std::ostream& os = open_out(file, out_path);
    if (format == "json") {
        json j{{"config", cfg}, {"points", json::array()}};
        for (const auto& p : rep.points)
            j["points"].push_back({{"eb_n0_db", p.eb_n0_db},
                                   {"es_n0_db", p.es_n0_db},
                                   {"frames", p.frames},
                                   {"sym_err", p.sym_err},
                                   {"bit_err", p.bit_err},
                                   {"frame_err", p.frame_err},
                                   {"ser", p.ser},
                                   {"ber", p.ber},
                                   {"fer", p.fer}});
        os << j.dump(2) << "\n";
        return 0;
    }
    os << "# config: " << cfg.dump() << "\n";
    os << "eb_n0_db,es_n0_db,frames,sym_err,bit_err,frame_err,ser,ber,fer\n";
    for (const auto& p : rep.points)
        os << fmt_double(p.eb_n0_db) << ',' << fmt_double(p.es_n0_db) << ',' << p.frames << ','
           << p.sym_err << ',' << p.bit_err << ',' << p.frame_err << ',' << fmt_double(p.ser)
           << ',' << fmt_double(p.ber) << ',' << fmt_double(p.fer) << "\n";
    return 0;
}

int run_capacity(int q, const std::string& sweep_spec, double samples, std::uint64_t seed,
                 int threads, const std::string& out_path, const std::string& format) {
    const std::vector<double> sweep = parse_sweep(sweep_spec);
    const nbcc::Constellation cs = nbcc::build_qam(q);
    nbcc::CapacityOptions opt;
    opt.samples = static_cast<long long>(samples);
    opt.seed = seed;
    opt.threads = threads;
    const nbcc::CapacityCurve cm = nbcc::capacity_curve(cs, sweep, false, opt);
    const nbcc::CapacityCurve bicm = nbcc::capacity_curve(cs, sweep, true, opt);
    const json cfg{{"q", q}, {"samples", opt.samples}, {"seed", seed}};
    std::ofstream file;
    std::ostream& os = open_out(file, out_path);
    if (format == "json") {
        json j{{"config", cfg}, {"points", json::array()}};
        for (size_t i = 0; i < sweep.size(); ++i)
            j["points"].push_back({{"snr_db", sweep[i]},
                                   {"cm_bits", cm.bits[i]},
                                   {"bicm_bits", bicm.bits[i]}});
        os << j.dump(2) << "\n";
        return 0;
    }
    os << "# config: " << cfg.dump() << "\n";
    os << "snr_db,cm_bits,bicm_bits\n";
    for (size_t i = 0; i < sweep.size(); ++i)
        os << fmt_double(sweep[i]) << ',' << fmt_double(cm.bits[i]) << ','
           << fmt_double(bicm.bits[i]) << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"non-binary one-memory RSC codes on QAM: design, search, decode, simulate"};
    app.require_subcommand(1);

    int threads = 1;
    std::uint64_t seed = 1;
    std::string out_path;
    std::string format = "csv";
    app.add_option("--threads", threads, "worker threads (results are thread-count invariant)");
    app.add_option("--seed", seed, "master RNG seed");
    app.add_option("--out", out_path, "output file (default: stdout)");
    app.add_option("--format", format, "output format")->check(CLI::IsMember({"csv", "json"}));

    // field-info
    auto* fi = app.add_subcommand("field-info", "print GF(2^m) log/antilog tables");
    int fi_m = 4, fi_poly = 0b11001;
    fi->add_option("--m", fi_m, "field degree")->required();
    fi->add_option("--poly", fi_poly, "primitive polynomial bitmask")->required();

    // constellation
    auto* co = app.add_subcommand("constellation", "dump the Gray-mapped constellation");
    int co_q = 16;
    bool co_dump = false;
    co->add_option("--q", co_q, "constellation order (4, 16, 64)")->required();
    co->add_flag("--dump", co_dump, "emit the full point table");

    // shared code selection flags
    std::string code_path;
    int sq = 0, sa1 = 1, sa2 = 1, sa3 = 0;
    auto add_code_flags = [&](CLI::App* sub) {
        sub->add_option("--code", code_path, "code descriptor JSON");
        sub->add_option("--q", sq, "field order for the embedded default field");
        sub->add_option("--a1", sa1, "feedback coefficient");
        sub->add_option("--a2", sa2, "parity coefficient (next state)");
        sub->add_option("--a3", sa3, "parity coefficient (current state)");
    };

    // encode
    auto* en = app.add_subcommand("encode", "encode a symbol file");
    std::string en_in;
    bool en_term = false;
    add_code_flags(en);
    en->add_option("--in", en_in, "input symbols CSV")->required();
    en->add_flag("--terminate", en_term, "append the state-clearing tail symbol");

    // decode
    auto* de = app.add_subcommand("decode", "max-log-MAP decode observations");
    std::string de_in;
    double de_snr = 10.0;
    bool de_term = false;
    add_code_flags(de);
    de->add_option("--in", de_in, "observations CSV: stage,sys_I,sys_Q,par_I,par_Q")->required();
    de->add_option("--snr-db", de_snr, "Es/N0 in dB")->required();
    de->add_flag("--terminated", de_term, "frame carries a termination tail");

    // spectrum
    auto* sp = app.add_subcommand("spectrum", "two-term distance spectrum of a code");
    bool sp_ordered = false;
    add_code_flags(sp);
    sp->add_flag("--ordered", sp_ordered, "count ordered pairs (twice the unordered counts)");

    // search
    auto* se = app.add_subcommand("search", "rank all valid codes by distance spectrum");
    int se_q = 16, se_top = 20;
    se->add_option("--q", se_q, "field order")->required();
    se->add_option("--top", se_top, "ranking positions to report");

    // simulate
    auto* si = app.add_subcommand("simulate", "Monte Carlo SER/BER/FER sweep");
    std::string si_mod = "qam", si_sweep;
    int si_frame_len = 100;
    double si_fmax = 1e6, si_fmin = 100;
    bool si_term = false;
    add_code_flags(si);
    si->add_option("--mod", si_mod, "modulation: qam or bpsk");
    si->add_option("--ebn0", si_sweep, "Eb/N0 sweep, value or start:step:stop")->required();
    si->add_option("--frame-len", si_frame_len, "information symbols per frame");
    si->add_option("--frames-max", si_fmax, "frame cap per point");
    si->add_option("--ferr-min", si_fmin, "frame errors to stop a point");
    si->add_flag("--terminate", si_term, "terminate frames");

    // capacity
    auto* ca = app.add_subcommand("capacity", "CM and BICM mutual information curves");
    int ca_q = 64;
    std::string ca_sweep;
    double ca_samples = 1e6;
    ca->add_option("--q", ca_q, "constellation order")->required();
    ca->add_option("--snr", ca_sweep, "Es/N0 sweep, value or start:step:stop")->required();
    ca->add_option("--samples", ca_samples, "Monte Carlo samples per point");

    CLI11_PARSE(app, argc, argv);

    try {
        if (fi->parsed()) return run_field_info(fi_m, fi_poly, out_path, format);
        if (co->parsed()) return run_constellation(co_q, out_path, format);
        if (en->parsed())
            return run_encode(resolve_code(code_path, sq, sa1, sa2, sa3), en_in, en_term,
                              out_path);
        if (de->parsed())
            return run_decode(resolve_code(code_path, sq, sa1, sa2, sa3), de_in, de_snr, de_term,
                              out_path);
        if (sp->parsed())
            return run_spectrum(resolve_code(code_path, sq, sa1, sa2, sa3), sp_ordered, threads,
                                out_path, format);
        if (se->parsed()) return run_search(se_q, se_top, threads, out_path, format);
        if (si->parsed())
            return run_simulate(resolve_code(code_path, sq, sa1, sa2, sa3), si_mod, si_sweep,
                                si_frame_len, si_fmax, si_fmin, seed, threads, si_term, out_path,
                                format);
        if (ca->parsed())
            return run_capacity(ca_q, ca_sweep, ca_samples, seed, threads, out_path, format);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
