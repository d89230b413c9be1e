#include "ichem/model_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace ichem {

using nlohmann::json;

namespace {

[[noreturn]] void fail(std::string_view source, const std::string& msg)
{
    throw ConfigError(std::string(source) + ": " + msg);
}

double read_number(const json& j, std::string_view source, const std::string& field)
{
    if (!j.is_number()) {
        fail(source, "field '" + field + "' must be a number");
    }
    return j.get<double>();
}

Interval read_interval(const json& j, std::string_view source, const std::string& field)
{
    if (j.is_number()) {
        return Interval::point(j.get<double>());
    }
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
        const double lo = j[0].get<double>();
        const double hi = j[1].get<double>();
        if (!(lo <= hi)) {
            fail(source, "field '" + field + "': lower endpoint exceeds upper endpoint");
        }
        return Interval(lo, hi);
    }
    fail(source, "field '" + field + "' must be a number or a [lower, upper] pair");
}

} // namespace

ImpreciseModel parse_model(std::string_view text, std::string_view source)
{
    json doc;
    try {
        doc = json::parse(text, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::parse_error& e) {
        fail(source, e.what());
    }
    if (!doc.is_object()) {
        fail(source, "top level must be a JSON object");
    }

    static const std::set<std::string> known = {
        "name",   "description", "S0",     "D",      "m1",     "delta1",
        "sigma1", "m2",          "delta2", "sigma2", "sigma3", "jumps",
    };
    for (const auto& item : doc.items()) {
        if (!known.contains(item.key())) {
            fail(source, "unknown field '" + item.key() + "'");
        }
    }

    auto required = [&](const char* key) -> const json& {
        auto it = doc.find(key);
        if (it == doc.end()) {
            fail(source, std::string("missing field '") + key + "'");
        }
        return *it;
    };

    ImpreciseModel m;
    m.S0 = read_number(required("S0"), source, "S0");
    m.D = read_interval(required("D"), source, "D");
    m.m1 = read_interval(required("m1"), source, "m1");
    m.delta1 = read_interval(required("delta1"), source, "delta1");
    m.sigma1 = read_interval(required("sigma1"), source, "sigma1");
    m.m2 = read_interval(required("m2"), source, "m2");
    m.delta2 = read_interval(required("delta2"), source, "delta2");
    m.sigma2 = read_interval(required("sigma2"), source, "sigma2");
    m.sigma3 = read_interval(required("sigma3"), source, "sigma3");

    if (auto it = doc.find("jumps"); it != doc.end()) {
        if (!it->is_array()) {
            fail(source, "field 'jumps' must be a list of records");
        }
        static const std::set<std::string> jump_keys = {"label", "weight", "gamma1", "gamma2",
                                                        "gamma3"};
        for (std::size_t k = 0; k < it->size(); ++k) {
            const json& rec = (*it)[k];
            const std::string where = "jumps[" + std::to_string(k) + "]";
            if (!rec.is_object()) {
                fail(source, "field '" + where + "' must be an object");
            }
            for (const auto& item : rec.items()) {
                if (!jump_keys.contains(item.key())) {
                    fail(source, "unknown field '" + where + "." + item.key() + "'");
                }
            }
            JumpMark mark;
            if (auto l = rec.find("label"); l != rec.end()) {
                if (!l->is_string()) {
                    fail(source, "field '" + where + ".label' must be a string");
                }
                mark.label = l->get<std::string>();
            } else {
                mark.label = "u" + std::to_string(k + 1);
            }
            for (const char* key : {"weight", "gamma1", "gamma2", "gamma3"}) {
                if (!rec.contains(key)) {
                    fail(source, "missing field '" + where + "." + key + "'");
                }
            }
            mark.weight = read_number(rec["weight"], source, where + ".weight");
            mark.gamma[0] = read_number(rec["gamma1"], source, where + ".gamma1");
            mark.gamma[1] = read_number(rec["gamma2"], source, where + ".gamma2");
            mark.gamma[2] = read_number(rec["gamma3"], source, where + ".gamma3");
            m.jumps.marks.push_back(std::move(mark));
        }
    }
    return m;
}

ImpreciseModel load_model(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError(path.string() + ": cannot open model file");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_model(buf.str(), path.string());
}

std::string model_to_json(const ImpreciseModel& model)
{
    auto iv = [](const Interval& a) -> json {
        if (a.is_degenerate()) {
            return a.lower();
        }
        return json::array({a.lower(), a.upper()});
    };
    json doc = {
        {"S0", model.S0},         {"D", iv(model.D)},           {"m1", iv(model.m1)},
        {"delta1", iv(model.delta1)}, {"sigma1", iv(model.sigma1)}, {"m2", iv(model.m2)},
        {"delta2", iv(model.delta2)}, {"sigma2", iv(model.sigma2)}, {"sigma3", iv(model.sigma3)},
    };
    json jumps = json::array();
    for (const auto& m : model.jumps.marks) {
        jumps.push_back({{"label", m.label},
                         {"weight", m.weight},
                         {"gamma1", m.gamma[0]},
                         {"gamma2", m.gamma[1]},
                         {"gamma3", m.gamma[2]}});
    }
    doc["jumps"] = std::move(jumps);
    return doc.dump(2);
}

} // namespace ichem
