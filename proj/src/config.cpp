#include "crashsev/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "crashsev/error.hpp"
#include "crashsev/format.hpp"

namespace crashsev {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

[[noreturn]] void bad(const std::string& path, int line, const std::string& what) {
    throw ConfigError(path + ":" + std::to_string(line) + ": " + what);
}

long long parse_int(const std::string& v, const std::string& path, int line) {
    long long out = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size())
        bad(path, line, "expected an integer, got '" + v + "'");
    return out;
}

double parse_real(const std::string& v, const std::string& path, int line) {
    try {
        std::size_t used = 0;
        const double out = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return out;
    } catch (const std::exception&) {
        bad(path, line, "expected a number, got '" + v + "'");
    }
}

bool parse_bool(const std::string& v, const std::string& path, int line) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    bad(path, line, "expected true/false, got '" + v + "'");
}

std::vector<int> parse_int_list(const std::string& v, const std::string& path, int line) {
    std::vector<int> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) bad(path, line, "empty entry in list '" + v + "'");
        out.push_back(static_cast<int>(parse_int(item, path, line)));
    }
    if (out.empty()) bad(path, line, "empty list");
    return out;
}

std::string fmt_real(double v) { return format_real(v); }

}  // namespace

PipelineConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config file '" + path + "'");

    PipelineConfig c;
    std::string section;
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string line = raw;
        const std::size_t comment = line.find_first_of("#;");
        if (comment != std::string::npos) line.erase(comment);
        line = trim(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']') bad(path, line_no, "unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section != "data" && section != "split" && section != "rank" &&
                section != "balance" && section != "tree" && section != "forest" &&
                section != "boost" && section != "mlp" && section != "run")
                bad(path, line_no, "unknown section [" + section + "]");
            continue;
        }

        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) bad(path, line_no, "expected key=value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (section.empty()) bad(path, line_no, "key '" + key + "' outside any section");
        if (key.empty()) bad(path, line_no, "empty key");

        const std::string qual = section + "." + key;
        if (qual == "data.path") c.data_path = value;
        else if (qual == "data.schema") c.schema_path = value;
        else if (qual == "data.severity_column") c.severity_column = value;
        else if (qual == "split.fraction") c.fraction = parse_real(value, path, line_no);
        else if (qual == "rank.lag") {
            if (value == "auto") {
                c.lag_auto = true;
            } else {
                c.lag_auto = false;
                c.lag = static_cast<int>(parse_int(value, path, line_no));
            }
        } else if (qual == "rank.max_lag")
            c.max_lag = static_cast<int>(parse_int(value, path, line_no));
        else if (qual == "rank.top_k") c.top_k = static_cast<int>(parse_int(value, path, line_no));
        else if (qual == "rank.mode") {
            if (value == "conditional") c.rank_mode = RankMode::kConditionalOnAll;
            else if (value == "pairwise") c.rank_mode = RankMode::kPairwise;
            else bad(path, line_no, "rank.mode must be conditional or pairwise");
        } else if (qual == "rank.on") {
            if (value == "train") c.rank_on_balanced = false;
            else if (value == "balanced") c.rank_on_balanced = true;
            else bad(path, line_no, "rank.on must be train or balanced");
        } else if (qual == "balance.k")
            c.balance_k = static_cast<int>(parse_int(value, path, line_no));
        else if (qual == "balance.round_binary")
            c.round_binary = parse_bool(value, path, line_no);
        else if (qual == "tree.max_depth")
            c.tree.max_depth = static_cast<int>(parse_int(value, path, line_no));
        else if (qual == "tree.min_samples_split")
            c.tree.min_samples_split = static_cast<int>(parse_int(value, path, line_no));
        else if (qual == "forest.n_estimators")
            c.forest.n_estimators = static_cast<int>(parse_int(value, path, line_no));
        else if (qual == "forest.max_depth")
            c.forest.max_depth = static_cast<int>(parse_int(value, path, line_no));
        else if (qual == "forest.min_samples_split")
            c.forest.min_samples_split = static_cast<int>(parse_int(value, path, line_no));
        else if (qual == "forest.features_per_split")
            c.forest.features_per_split = static_cast<int>(parse_int(value, path, line_no));
        else if (qual == "forest.bootstrap")
            c.forest.bootstrap = parse_bool(value, path, line_no);
        else if (qual == "boost.rounds")
            c.boost.rounds = static_cast<int>(parse_int(value, path, line_no));
        else if (qual == "boost.eta") c.boost.eta = parse_real(value, path, line_no);
        else if (qual == "boost.lambda") c.boost.lambda = parse_real(value, path, line_no);
        else if (qual == "boost.gamma") c.boost.gamma = parse_real(value, path, line_no);
        else if (qual == "boost.max_depth")
            c.boost.max_depth = static_cast<int>(parse_int(value, path, line_no));
        else if (qual == "boost.min_child_hessian")
            c.boost.min_child_hessian = parse_real(value, path, line_no);
        else if (qual == "mlp.hidden") c.mlp.hidden = parse_int_list(value, path, line_no);
        else if (qual == "mlp.epochs")
            c.mlp.epochs = static_cast<int>(parse_int(value, path, line_no));
        else if (qual == "mlp.batch_size")
            c.mlp.batch_size = static_cast<int>(parse_int(value, path, line_no));
        else if (qual == "mlp.learning_rate")
            c.mlp.learning_rate = parse_real(value, path, line_no);
        else if (qual == "run.seed")
            c.seed = static_cast<std::uint64_t>(parse_int(value, path, line_no));
        else if (qual == "run.out_dir") c.out_dir = value;
        else if (qual == "run.threads")
            c.threads = static_cast<int>(parse_int(value, path, line_no));
        else
            bad(path, line_no, "unknown key '" + key + "' in section [" + section + "]");
    }
    return c;
}

void save_config(const PipelineConfig& c, std::ostream& out) {
    out << "[data]\n";
    out << "path=" << c.data_path << '\n';
    out << "schema=" << c.schema_path << '\n';
    out << "severity_column=" << c.severity_column << '\n';
    out << "\n[split]\n";
    out << "fraction=" << fmt_real(c.fraction) << '\n';
    out << "\n[rank]\n";
    out << "lag=" << (c.lag_auto ? std::string("auto") : std::to_string(c.lag)) << '\n';
    out << "max_lag=" << c.max_lag << '\n';
    out << "top_k=" << c.top_k << '\n';
    out << "mode=" << (c.rank_mode == RankMode::kPairwise ? "pairwise" : "conditional") << '\n';
    out << "on=" << (c.rank_on_balanced ? "balanced" : "train") << '\n';
    out << "\n[balance]\n";
    out << "k=" << c.balance_k << '\n';
    out << "round_binary=" << (c.round_binary ? "true" : "false") << '\n';
    out << "\n[tree]\n";
    out << "max_depth=" << c.tree.max_depth << '\n';
    out << "min_samples_split=" << c.tree.min_samples_split << '\n';
    out << "\n[forest]\n";
    out << "n_estimators=" << c.forest.n_estimators << '\n';
    out << "max_depth=" << c.forest.max_depth << '\n';
    out << "min_samples_split=" << c.forest.min_samples_split << '\n';
    out << "features_per_split=" << c.forest.features_per_split << '\n';
    out << "bootstrap=" << (c.forest.bootstrap ? "true" : "false") << '\n';
    out << "\n[boost]\n";
    out << "rounds=" << c.boost.rounds << '\n';
    out << "eta=" << fmt_real(c.boost.eta) << '\n';
    out << "lambda=" << fmt_real(c.boost.lambda) << '\n';
    out << "gamma=" << fmt_real(c.boost.gamma) << '\n';
    out << "max_depth=" << c.boost.max_depth << '\n';
    out << "min_child_hessian=" << fmt_real(c.boost.min_child_hessian) << '\n';
    out << "\n[mlp]\n";
    out << "hidden=";
    for (std::size_t i = 0; i < c.mlp.hidden.size(); ++i) {
        if (i) out << ',';
        out << c.mlp.hidden[i];
    }
    out << '\n';
    out << "epochs=" << c.mlp.epochs << '\n';
    out << "batch_size=" << c.mlp.batch_size << '\n';
    out << "learning_rate=" << fmt_real(c.mlp.learning_rate) << '\n';
    out << "\n[run]\n";
    out << "seed=" << c.seed << '\n';
    out << "out_dir=" << c.out_dir << '\n';
    out << "threads=" << c.threads << '\n';
}

void save_config(const PipelineConfig& c, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write config file '" + path + "'");
    save_config(c, out);
}

}  // namespace crashsev
