pub(super) const FIRST_NAMES: &[&str] = &[
    "James", "Mary", "Robert", "Patricia", "Michael", "Jennifer", "William", "Linda", "David", "Elizabeth",
    "Richard", "Barbara", "Joseph", "Susan", "Thomas", "Jessica", "Charles", "Sarah", "Daniel", "Karen",
    "Matthew", "Lisa", "Anthony", "Nancy", "Mark", "Betty", "Steven", "Sandra", "Paul", "Ashley",
    "Andrew", "Kimberly", "Joshua", "Emily", "Kevin", "Donna", "Brian", "Michelle", "George", "Carol",
    "Edward", "Amanda", "Ronald", "Melissa", "Timothy", "Deborah", "Jason", "Stephanie", "Ryan", "Rebecca",
    "Omar", "Priya", "Hiroshi", "Mei", "Carlos", "Lucia", "Ahmed", "Fatima", "Ivan", "Olga",
];

pub(super) const LAST_NAMES: &[&str] = &[
    "Smith", "Johnson", "Williams", "Brown", "Jones", "Garcia", "Miller", "Davis", "Rodriguez", "Martinez",
    "Hernandez", "Lopez", "Gonzalez", "Wilson", "Anderson", "Thomas", "Taylor", "Moore", "Jackson", "Martin",
    "Lee", "Perez", "Thompson", "White", "Harris", "Sanchez", "Clark", "Ramirez", "Lewis", "Robinson",
    "Walker", "Young", "Allen", "King", "Wright", "Scott", "Torres", "Nguyen", "Hill", "Flores",
    "Green", "Adams", "Nelson", "Baker", "Hall", "Rivera", "Campbell", "Mitchell", "Carter", "Roberts",
    "Patel", "Kim", "Chen", "Okafor", "Novak", "Schmidt", "Rossi", "Tanaka", "Kowalski", "Silva",
];

pub(super) const STREETS: &[&str] = &[
    "Courage", "Elm", "Maple", "Oak", "Pine", "Cedar", "Birch", "Willow", "Lakeview", "Hillcrest",
    "Sunset", "Riverside", "Meadow", "Park", "Washington", "Lincoln", "Jefferson", "Franklin", "Highland", "Ridge",
    "Chestnut", "Magnolia", "Spruce", "Harbor", "Orchard", "Valley", "Summit", "Prairie", "Canyon", "Juniper",
];

pub(super) const STREET_SUFFIXES: &[&str] = &["St", "Ave", "Blvd", "Rd", "Ln", "Dr", "Ct", "Way", "Pl", "Ter"];

pub(super) const UNIT_PREFIXES: &[&str] = &["STE", "APT", "UNIT"];

/// (city, state)
pub(super) const CITIES: &[(&str, &str)] = &[
    ("Brownsville", "TX"),
    ("Austin", "TX"),
    ("Springfield", "IL"),
    ("Madison", "WI"),
    ("Portland", "OR"),
    ("Denver", "CO"),
    ("Columbus", "OH"),
    ("Raleigh", "NC"),
    ("Tucson", "AZ"),
    ("Omaha", "NE"),
    ("Boise", "ID"),
    ("Albany", "NY"),
    ("Richmond", "VA"),
    ("Savannah", "GA"),
    ("Spokane", "WA"),
    ("Tampa", "FL"),
    ("Reno", "NV"),
    ("Lansing", "MI"),
    ("Trenton", "NJ"),
    ("Fresno", "CA"),
];

pub(super) const EMPLOYERS: &[&str] = &[
    "Acme Logistics", "Blue River Health", "Northwind Traders", "Summit Engineering", "Lakeside Schools",
    "Greenfield Foods", "Ironclad Manufacturing", "Brightpath Software", "Harborview Hospital", "Redwood Realty",
    "Crescent Insurance", "Pioneer Freight", "Silverline Media", "Cobalt Energy", "Evergreen Landscaping",
];

pub(super) const CREDIT_DESCRIPTIONS: &[&str] = &[
    "Payroll Deposit", "Mobile Check Deposit", "Transfer From Savings", "Interest Payment", "Refund",
    "Wire Transfer In", "Cash Deposit", "Tax Refund", "Zelle Payment Received", "Dividend",
];

pub(super) const DEBIT_DESCRIPTIONS: &[&str] = &[
    "Coffee Shop", "Online Purchase", "Utility Bill", "Grocery Store", "Gas Station", "Rent Payment",
    "Restaurant", "Insurance Premium", "Phone Bill", "ATM Withdrawal", "Pharmacy", "Streaming Service",
];
