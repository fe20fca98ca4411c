//! Curated validity test vectors.
//!
//! Each entry records the verdict a standard cheminformatics toolkit gives
//! for the string. Used by the validator agreement checks; kept in the
//! library so test suites across the workspace share one copy.

pub const CURATED_VALIDITY: [(&str, bool); 200] = [
    // ── acyclic organics ────────────────────────────────────────────────
    ("C", true),
    ("CCO", true),
    ("CC(=O)O", true),
    ("CC(=O)OC", true),
    ("CCN", true),
    ("CC(C)(C)C", true),
    ("C=C", true),
    ("C#C", true),
    ("C#N", true),
    ("CC#N", true),
    ("C=O", true),
    ("O", true),
    ("N", true),
    ("O=C=O", true),
    ("C=C=C", true),
    ("CCCl", true),
    ("ClC(Cl)(Cl)Cl", true),
    ("FC(F)(F)F", true),
    ("CSC", true),
    ("CS(=O)C", true),
    ("CS(=O)(=O)C", true),
    ("OS(=O)(=O)O", true),
    ("OP(=O)(O)O", true),
    ("CP(C)C", true),
    ("NCCO", true),
    ("NC(=O)C", true),
    ("CNC(=O)C", true),
    ("CC(=O)Cl", true),
    ("C(=O)O", true),
    ("OCC(O)CO", true),
    ("C(Cl)(Cl)Cl", true),
    ("CC=O", true),
    ("CC(=O)C", true),
    ("N#N", true),
    ("FF", true),
    ("[H][H]", true),
    ("CN(C)C", true),
    ("B", true),
    ("OB(O)O", true),
    ("C[Si](C)(C)C", true),
    ("CCS", true),
    ("S=C=S", true),
    ("CCCC(=O)O", true),
    ("CC(N)C(=O)O", true),
    ("NCC(=O)O", true),
    ("C[C@@H](N)C(=O)O", true),
    ("N[C@@H](Cc1ccccc1)C(=O)O", true),
    ("CC(C)CC(N)C(=O)O", true),
    ("OC(=O)CC(O)(CC(=O)O)C(=O)O", true),
    ("F/C=C/F", true),
    ("F/C=C\\F", true),
    ("[13CH4]", true),
    ("[2H]O[2H]", true),
    ("[NH4+]", true),
    ("[OH-]", true),
    ("[Na+]", true),
    ("[Cl-]", true),
    ("[K+]", true),
    ("[O-]C(=O)C", true),
    ("C[N+](C)(C)C", true),
    ("C[N+](=O)[O-]", true),
    ("[CH3]", true),
    ("[NH4+].[Cl-]", true),
    // ── aliphatic rings ─────────────────────────────────────────────────
    ("C1CC1", true),
    ("C1CCC1", true),
    ("C1CCCC1", true),
    ("C1CCCCC1", true),
    ("C1CCOC1", true),
    ("C1CCOCC1", true),
    ("C1CCNCC1", true),
    ("O1CCOCC1", true),
    ("C1CCNC1", true),
    ("C1CCSC1", true),
    ("C1CC2CCC1CC2", true),
    ("C1(CC1)CC", true),
    ("C1CCCCC1C1CCCCC1", true),
    ("O=C1CCCCC1", true),
    ("OC1CCCCC1", true),
    ("C1=CCCCC1", true),
    ("C1=CC=CC=C1", true),
    ("C1=CC=CC1", true),
    ("N1CC1", true),
    ("O1CC1", true),
    ("S1CC1", true),
    ("C%10CCCCCCCC%10", true),
    ("CC1=CC(=O)CC(C)(C)C1", true),
    // ── aromatics ───────────────────────────────────────────────────────
    ("c1ccccc1", true),
    ("Cc1ccccc1", true),
    ("Oc1ccccc1", true),
    ("Nc1ccccc1", true),
    ("Clc1ccccc1", true),
    ("Fc1ccccc1", true),
    ("Brc1ccccc1", true),
    ("Sc1ccccc1", true),
    ("COc1ccccc1", true),
    ("OCc1ccccc1", true),
    ("O=Cc1ccccc1", true),
    ("OC(=O)c1ccccc1", true),
    ("c1ccc(cc1)C#N", true),
    ("c1ccc(cc1)C(=O)N", true),
    ("c1ccc(cc1)[N+](=O)[O-]", true),
    ("[O-]c1ccccc1", true),
    ("c1ccc2ccccc2c1", true),
    ("c1ccc2cc3ccccc3cc2c1", true),
    ("c1ccncc1", true),
    ("n1ccccc1", true),
    ("c1ccoc1", true),
    ("o1cccc1", true),
    ("c1ccsc1", true),
    ("s1cccc1", true),
    ("c1cc[nH]c1", true),
    ("[nH]1cccc1", true),
    ("c1c[nH]cn1", true),
    ("c1ccc2c(c1)cc[nH]2", true),
    ("c1ccc2c(c1)cccn2", true),
    ("c1cnccn1", true),
    ("c1ccnnc1", true),
    ("c1cncnc1", true),
    ("c1cscn1", true),
    ("c1cocn1", true),
    ("Cn1cccc1", true),
    ("c1ccc(cc1)c1ccccc1", true),
    ("c1ccccc1c1ccccc1", true),
    ("Cc1ccco1", true),
    ("C1=CSC=C1", true),
    ("CC1=CSC=C1", true),
    ("O=c1cccc[nH]1", true),
    ("[cH-]1cccc1", true),
    ("[o+]1ccccc1", true),
    ("C[n+]1ccccc1", true),
    ("c1cc2ccc3cccc4ccc(c1)c2c34", true),
    ("Nc1ncnc2[nH]cnc12", true),
    // ── drug-like ───────────────────────────────────────────────────────
    ("CC(=O)OC1=CC=CC=C1C(=O)O", true),
    ("CC(=O)NC1=CC=C(C=C1)O", true),
    ("CN1C=NC2=C1C(=O)N(C(=O)N2C)C", true),
    ("Cn1cnc2c1c(=O)n(C)c(=O)n2C", true),
    ("CN1CCC[C@H]1c1cccnc1", true),
    ("CC(C)Cc1ccc(cc1)C(C)C(=O)O", true),
    ("OCC1OC(O)C(O)C(O)C1O", true),
    ("OC(=O)C(C)c1ccc(cc1)CC(C)C", true),
    // ── syntax errors ───────────────────────────────────────────────────
    ("C1CC", false),
    ("C1CC2C12", false),
    ("CC(", false),
    ("CC)", false),
    ("C(C", false),
    ("[CH", false),
    ("C=", false),
    ("=CC", false),
    ("C%1C", false),
    ("1CC", false),
    ("C..C", false),
    (".CC", false),
    ("C[]", false),
    ("[Xz]C", false),
    ("X", false),
    ("c1ccccc", false),
    ("C1=C1", false),
    ("C%12CC", false),
    ("C=(C)C", false),
    ("N1CC", false),
    // ── valence violations ──────────────────────────────────────────────
    ("C(C)(C)(C)(C)C", false),
    ("CC(C)(C)(C)C", false),
    ("O=C(=O)O", false),
    ("N(C)(C)(C)C", false),
    ("CN(=O)=O", false),
    ("ON(=O)=O", false),
    ("O(C)(C)C", false),
    ("OO(C)C", false),
    ("F(C)C", false),
    ("CCl(C)C", false),
    ("[CH5]", false),
    ("[OH3]", false),
    ("[NH5]", false),
    ("B(C)(C)(C)C", false),
    ("I(C)C", false),
    ("OS(=O)(=O)(=O)O", false),
    ("O=O=O", false),
    ("N#C#N", false),
    ("Cl=C", false),
    ("N=N=N", false),
    ("C(=O)(=O)=O", false),
    ("[Si](C)(C)(C)(C)C", false),
    ("P(C)(C)(C)(C)(C)C", false),
    ("C#O", false),
    // ── aromatic system violations ──────────────────────────────────────
    ("c1ccc1", false),
    ("c1cccc1", false),
    ("c1ccccccc1", false),
    ("c1cc1", false),
    ("cc", false),
    ("cC", false),
    ("ccc", false),
    ("c1ccnc1", false),
    ("c1cccn1", false),
    ("c1occo1", false),
    ("n1cncn1", false),
    ("c1cnc1", false),
    ("c1cc[nH][nH]1", false),
    ("[nH2]1cccc1", false),
    ("Cc1ccc1", false),
    ("c1ccc(cc1)c1ccc1", false),
];
