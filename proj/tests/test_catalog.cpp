#include <doctest.h>

#include <set>

#include "align/catalog.h"
#include "align/error.h"

using namespace align;

namespace {

struct ExpectedPractice {
  const char* criterion;
  const char* id;
  const char* table_name;  // as printed in the framework table
  const char* level1;
};

// Level-1 reference states, copied from the published framework table.
const ExpectedPractice kExpected[] = {
    {"customer-understanding", "customer-segmentation", "Segmentation of clients based on information analysis.",
     "There is no segmentation of the customer base"},
    {"customer-understanding", "customer-sentiment-analysis", "Analysis of customer sentiments.",
     "There are no tools or data sources for customer sentiment analysis."},
    {"customer-understanding", "potential-client-behavior-analysis",
     "Analysis of the behavior and tastes of potential clients.",
     "There are no tools or data sources for analysis of behavior and preferences."},
    {"customer-understanding", "customer-base-management", "Management of current customer base with computer systems.",
     "There is no database of current customers"},
    {"customer-understanding", "customer-information-integration",
     "Integration of information sources of current customers and prospects.",
     "There is no integration strategy for information sources."},
    {"marketing-and-sales", "electronic-sales-channels", "Use of electronic sales channels.",
     "There are no electronic sales channels."},
    {"marketing-and-sales", "electronic-marketing-channels", "Use of electronic marketing channels",
     "There are no electronic marketing channels"},
    {"marketing-and-sales", "predictive-marketing", "Implementation of predictive marketing",
     "There is no predictive marketing"},
    {"marketing-and-sales", "sales-process-digitization", "Digitalization of operative sales processes towards clients.",
     "Completely manual sales processes"},
    {"marketing-and-sales", "sales-mobility", "Mobility in the sale process.",
     "There are no sales tools accessible through mobile devices"},
    {"marketing-and-sales", "sales-process-visibility", "Visibility of sales processes to the client.",
     "The sales process is not visible to the customer"},
    {"customer-service", "digital-service-channels", "Use of digital channels for customer service.",
     "There are no digital channels for customer service"},
    {"customer-service", "channel-coherence", "Coherence between the communication channels used with clients.",
     "The communication channels with customers do not share information between them"},
    {"customer-service", "simple-agile-service-tools", "Implementation of simple and agile service technology tools.",
     "There are no technological tools for customer service"},
    {"customer-service", "service-channel-availability", "High availability of digital service channels.",
     "Customer service channels do not have high availability strategies"},
    {"customer-service", "self-service-tools", "Use of self-service tools of requirements.",
     "No self-service requirements tools are implemented"},
    {"customer-service", "service-feedback-channels", "Feedback channels of service experience.",
     "Service experience feedback channels are not implemented."},
};

}  // namespace

TEST_CASE("built-in model shape") {
  const auto& m = builtin_model();
  CHECK(m.id == kCustomerAlignmentModelId);
  CHECK(m.name == "Business and IT alignment with customers");
  CHECK(validate_model(m).ok());
  REQUIRE(m.criteria.size() == 3);
  CHECK(m.criteria[0].practices.size() == 5);
  CHECK(m.criteria[1].practices.size() == 6);
  CHECK(m.criteria[2].practices.size() == 6);
  CHECK(m.practice_count() == 17);
  CHECK(m.descriptor_count() == 85);
}

TEST_CASE("scale labels") {
  const auto& scale = builtin_model().scale;
  REQUIRE(scale.size() == 5);
  CHECK(scale[0].label == "Initial / Process Ad Hoc");
  CHECK(scale[1].label == "Committed process");
  CHECK(scale[2].label == "Focused and stabilized process");
  CHECK(scale[3].label == "Improved / Managed Process");
  CHECK(scale[4].label == "Optimized Process");
  for (int i = 0; i < 5; ++i) {
    CHECK(scale[i].level == i + 1);
    CHECK_FALSE(scale[i].meaning.empty());
  }
}

TEST_CASE("criteria order and names") {
  const auto& m = builtin_model();
  CHECK(m.criteria[0].id == "customer-understanding");
  CHECK(m.criteria[1].id == "marketing-and-sales");
  CHECK(m.criteria[2].id == "customer-service");
  CHECK(m.criteria[0].name == "Customer understanding");
  CHECK(m.criteria[1].name == "Marketing and sales process");
  CHECK(m.criteria[2].name == "Customer service");
  for (const auto& c : m.criteria) CHECK_FALSE(c.objective.empty());
  CHECK(resolve_criterion(m, "Understanding of the client") == &m.criteria[0]);
  CHECK(resolve_criterion(m, "Marketing and sale process") == &m.criteria[1]);
}

TEST_CASE("practices match the framework table") {
  const auto& m = builtin_model();
  std::size_t index = 0;
  for (const auto& c : m.criteria) {
    for (const auto& p : c.practices) {
      REQUIRE(index < std::size(kExpected));
      const auto& e = kExpected[index++];
      CAPTURE(p.id);
      CHECK(c.id == e.criterion);
      CHECK(p.id == e.id);
      CHECK(resolve_practice(m, e.table_name) == &p);
      CHECK(lookup_descriptor(m, p.id, 1).reference_state == e.level1);
      CHECK_FALSE(p.description.empty());
    }
  }
  CHECK(index == 17);
}

TEST_CASE("every reference state is distinct within its practice and non-empty") {
  for (const auto& c : builtin_model().criteria) {
    for (const auto& p : c.practices) {
      std::set<std::string> seen;
      for (int level = 1; level <= 5; ++level) {
        const auto& text = lookup_descriptor(builtin_model(), p.id, level).reference_state;
        CHECK_FALSE(text.empty());
        CHECK(seen.insert(text).second);
      }
    }
  }
}

TEST_CASE("spot checks of upper levels") {
  const auto& m = builtin_model();
  CHECK(lookup_descriptor(m, "customer-segmentation", 5).reference_state ==
        "Clients segmented based on analysis of local and external data. CRM tools and business intelligence are "
        "used managed by the IT area");
  CHECK(lookup_descriptor(m, "self-service-tools", 5).reference_state ==
        "There is a complete self-service platform for customer requirements assisted by intelligent systems. "
        "Minimum human assistance.");
  CHECK(lookup_descriptor(m, "service-feedback-channels", 3).reference_state ==
        "A service comment box is available through a web portal or email.");
}

TEST_CASE("catalog entries") {
  const auto& catalog = builtin_catalog();
  REQUIRE(catalog.size() == 1);
  CHECK(catalog[0].version == "1");
  CHECK_FALSE(catalog[0].source.empty());
  CHECK(find_builtin("customer-alignment") == &catalog[0]);
  CHECK(find_builtin("other") == nullptr);
  CHECK(&builtin_model() == &builtin_model());
}

TEST_CASE("embedded text parses to the built-in model") {
  CHECK(parse_model(builtin_model_text()) == builtin_model());
  CHECK(parse_model(serialize_model(builtin_model())) == builtin_model());
}
