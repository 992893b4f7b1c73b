#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "qcav/config_model.hpp"
#include "qcav/errors.hpp"

using namespace qcav;

namespace {

bool mentions(const std::vector<std::string>& issues, const std::string& needle) {
    return std::any_of(issues.begin(), issues.end(), [&](const auto& s) { return s.find(needle) != std::string::npos; });
}

}  // namespace

TEST_CASE("detunings from a frequency ladder") {
    FrequencyLadder l;
    l.omega_w = l.omega_a = 10.0;
    l.omega_b = 7.0;
    l.omega_c = 4.0;
    l.omega_e = 4.0;
    l.omega_1 = 1.0;
    l.omega_2 = 1.0 + (l.omega_a - l.omega_b);
    l.omega_3 = 1.0 + (l.omega_b - l.omega_c);
    const Detunings d = derive_detunings(l, NonlinearityKind::TwoLevelEmitter);
    CHECK(d.delta_a == 0.0);
    CHECK(d.delta_b == 0.0);
    CHECK(d.delta_c == 0.0);
    CHECK(d.delta_e == 0.0);

    FrequencyLadder m = l;
    m.omega_a = l.omega_w + 0.1;
    m.omega_2 = m.omega_1 + (m.omega_a - m.omega_b);
    const Detunings e = derive_detunings(m, NonlinearityKind::Chi3);
    CHECK(e.delta_a == doctest::Approx(0.1));
    CHECK(e.delta_b == doctest::Approx(0.1));

    FrequencyLadder s;
    s.omega_a = 10.0;
    s.omega_b = 13.0;
    s.omega_p = s.omega_b - s.omega_a;
    CHECK(derive_detunings(s, NonlinearityKind::Chi2Shg).delta_lambda == 0.0);
}

TEST_CASE("validation diagnostics") {
    SystemConfig sys;
    sys.gamma_l = 5e-3;
    ScheduleSpec sch;
    sch.t_in = 2.5;
    sch.t_store = 9.0;
    sch.tau_o = 4.08;
    CHECK(validate(sys, sch).empty());

    ScheduleSpec overlap = sch;
    overlap.t_store = 0.0;
    CHECK(mentions(validate(sys, overlap), "absorption/emission windows overlap"));

    SystemConfig neg = sys;
    neg.gamma = -1.0;
    CHECK(mentions(validate(neg, sch), "negative coupling rate"));
}

TEST_CASE("rates are scaled by the pulse bandwidth") {
    SystemConfig s;
    s.gamma = 2.0;
    s.gamma_l = 0.5;
    s.tau_g = 2.0;
    const double w = 4.0 * std::log(2.0) / 2.0;
    const Rates r = s.rates();
    CHECK(r.gamma == doctest::Approx(2.0 * w));
    CHECK(r.big_gamma == doctest::Approx(2.5 * w));
    CHECK(r.xpm);
    s.nonlinearity = NonlinearityKind::Chi2Shg;
    CHECK_FALSE(s.rates().xpm);
}

TEST_CASE("config file round trip") {
    std::istringstream in("# comment\ngamma = 6\ngamma_l=1.5e-4  # trailing\nnonlinearity = chi2\nchi2 = 0.089\n\ndt = 0.01\n");
    const RunConfig c = parse_config(in);
    CHECK(c.system.gamma == 6.0);
    CHECK(c.system.gamma_l == 1.5e-4);
    CHECK(c.system.nonlinearity == NonlinearityKind::Chi2Shg);
    CHECK(c.dt == 0.01);

    std::istringstream again(format_config(c));
    const RunConfig d = parse_config(again);
    for (const auto& k : config_keys()) CHECK(get_config_value(c, k) == get_config_value(d, k));
}

TEST_CASE("config errors") {
    std::istringstream unknown("gama = 3\n");
    CHECK_THROWS_AS(parse_config(unknown), ConfigError);
    std::istringstream bad("gamma = fast\n");
    CHECK_THROWS_AS(parse_config(bad), ConfigError);
    std::istringstream kind("nonlinearity = chi5\n");
    CHECK_THROWS_AS(parse_config(kind), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/qcav.cfg"), ConfigError);
    CHECK(is_numeric_key("t_store"));
    CHECK_FALSE(is_numeric_key("nonlinearity"));
}
