#include "parcomm/smart.hpp"

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace parcomm {

namespace {

constexpr const char* kHeader = "parcomm-policy-bank v1";

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string hex(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
    return buf;
}

[[noreturn]] void bad(const std::string& path, const std::string& what) {
    throw std::runtime_error("policy bank " + path + ": " + what);
}

std::istringstream expect_line(std::istream& in, const std::string& path, const std::string& key) {
    std::string line;
    if (!std::getline(in, line)) bad(path, "truncated before '" + key + "'");
    std::istringstream ss(line);
    std::string word;
    ss >> word;
    if (word != key) bad(path, "expected '" + key + "', got '" + word + "'");
    return ss;
}

double parse_double(const std::string& s, const std::string& path) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        bad(path, "bad number '" + s + "'");
    }
    if (used != s.size()) bad(path, "bad number '" + s + "'");
    return v;
}

}  // namespace

void save_policy_bank(const PolicyBank& bank, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write policy bank " + path);
    out << kHeader << "\n";
    out << "model-hash " << hex(bank.model_hash) << "\n";
    out << "grid " << fmt(bank.grid.m_min) << " " << fmt(bank.grid.m_max) << " " << fmt(bank.grid.m_int) << "\n";
    out << "states " << bank.states << "\n";
    out << "entries " << bank.m.size() << "\n";
    for (std::size_t k = 0; k < bank.m.size(); ++k) {
        const MdpSolution& s = bank.solutions[k];
        out << "m " << fmt(bank.m[k]) << " J " << fmt(s.J) << " residual " << fmt(s.residual) << " sweeps "
            << s.sweeps << "\n";
        out << "policy";
        for (bool b : s.transmit) out << ' ' << (b ? 1 : 0);
        out << "\nf";
        for (Eigen::Index i = 0; i < s.f.size(); ++i) out << ' ' << fmt(s.f[i]);
        out << "\n";
    }
    if (!out) throw std::runtime_error("write failed for policy bank " + path);
}

PolicyBank load_policy_bank(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read policy bank " + path);
    std::string line;
    if (!std::getline(in, line) || line != kHeader) bad(path, "missing header");

    PolicyBank bank;
    {
        auto ss = expect_line(in, path, "model-hash");
        std::string h;
        ss >> h;
        bank.model_hash = std::stoull(h, nullptr, 16);
    }
    {
        auto ss = expect_line(in, path, "grid");
        std::string a, b, c;
        ss >> a >> b >> c;
        bank.grid = AuxCostGrid{parse_double(a, path), parse_double(b, path), parse_double(c, path)};
    }
    {
        auto ss = expect_line(in, path, "states");
        ss >> bank.states;
    }
    std::size_t entries = 0;
    {
        auto ss = expect_line(in, path, "entries");
        ss >> entries;
    }
    for (std::size_t k = 0; k < entries; ++k) {
        MdpSolution s;
        {
            auto ss = expect_line(in, path, "m");
            std::string m, kJ, J, kr, r, ks;
            ss >> m >> kJ >> J >> kr >> r >> ks >> s.sweeps;
            if (kJ != "J" || kr != "residual" || ks != "sweeps") bad(path, "malformed entry line");
            bank.m.push_back(parse_double(m, path));
            s.J = parse_double(J, path);
            s.residual = parse_double(r, path);
        }
        {
            auto ss = expect_line(in, path, "policy");
            int b = 0;
            while (ss >> b) s.transmit.push_back(b != 0);
        }
        {
            auto ss = expect_line(in, path, "f");
            std::vector<double> f;
            std::string w;
            while (ss >> w) f.push_back(parse_double(w, path));
            s.f = Eigen::Map<Eigen::VectorXd>(f.data(), static_cast<Eigen::Index>(f.size()));
        }
        if (s.transmit.size() != bank.states || static_cast<std::size_t>(s.f.size()) != bank.states)
            bad(path, "entry size does not match state count");
        bank.solutions.push_back(std::move(s));
    }
    return bank;
}

PolicyBank load_or_build_policy_bank(const AuxCostGrid& grid, const MdpModel& model, const std::string& dir) {
    if (dir.empty()) return build_policy_bank(grid, model);
    const std::uint64_t h = model_hash(model);
    const std::filesystem::path path = std::filesystem::path(dir) / ("bank-" + hex(h) + ".txt");
    if (std::filesystem::exists(path)) {
        PolicyBank cached = load_policy_bank(path.string());
        if (cached.model_hash == h && cached.grid.m_min == grid.m_min && cached.grid.m_max == grid.m_max &&
            cached.grid.m_int == grid.m_int && cached.states == model.states())
            return cached;
    }
    PolicyBank bank = build_policy_bank(grid, model);
    std::filesystem::create_directories(dir);
    save_policy_bank(bank, path.string());
    return bank;
}

}  // namespace parcomm
