//! Writes the test fixture corpus under `tests/fixtures/`.
//!
//! Each app is described by one row of Y/N flags; the generator turns
//! every flag into the manifest entries and code that exercise the
//! corresponding detector.
//!
//! ```text
//! cargo run -p appaudit-core --example gen_corpus
//! ```

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

const PERMISSIONS: [&str; 12] = [
    "android.permission.INTERNET",
    "android.permission.VIBRATE",
    "android.permission.RECEIVE_BOOT_COMPLETED",
    "android.permission.BLUETOOTH",
    "android.permission.ACCESS_NETWORK_STATE",
    "android.permission.ACCESS_WIFI_STATE",
    "android.permission.WAKE_LOCK",
    "android.permission.FOREGROUND_SERVICE",
    "com.google.android.c2dm.permission.RECEIVE",
    "com.google.android.finsky.permission.BIND_GET_INSTALL_REFERRER_SERVICE",
    "android.permission.USE_BIOMETRIC",
    "android.permission.USE_FINGERPRINT",
];

const GAEN_PERMISSION: &str = "com.google.android.gms.nearby.exposurenotification.EXPOSURE_CALLBACK";

struct Row {
    dir: &'static str,
    code: &'static str,
    /// P1..P12.
    perms: &'static str,
    /// location, storage, weak cipher, http, non-US server.
    violations: &'static str,
    /// unprotected component, PRNG, weak hash, backup, insecure SSL, no pinning.
    vulns: &'static str,
    /// constant SQL, constant keyword stored (logging and Janus are universal).
    fps: &'static str,
}

#[rustfmt::skip]
const ROWS: [Row; 24] = [
    Row { dir: "alabama",        code: "al", perms: "YYYYYYYYNNNN", violations: "YYYNY", vulns: "YYNNNY", fps: "YY" },
    Row { dir: "arizona",        code: "az", perms: "YNYYYNYYYYNN", violations: "YNNNN", vulns: "NYYNYN", fps: "YN" },
    Row { dir: "california",     code: "ca", perms: "YNYYYNYYNNNN", violations: "YNNYY", vulns: "NYNNNY", fps: "YY" },
    Row { dir: "colorado",       code: "co", perms: "YNYYYNYYNNNN", violations: "YNNYY", vulns: "NYNNNY", fps: "YY" },
    Row { dir: "connecticut",    code: "ct", perms: "YNYYYNYYNNNN", violations: "YNNNY", vulns: "YYNNNY", fps: "YY" },
    Row { dir: "delaware",       code: "de", perms: "YYYYYYNYNNNN", violations: "YYNYN", vulns: "NYYNNN", fps: "YY" },
    Row { dir: "dc",             code: "dc", perms: "YNYYYNYYNNNN", violations: "YNNYY", vulns: "NYNYNY", fps: "YY" },
    Row { dir: "guam",           code: "gu", perms: "YYYYYYYYNNNN", violations: "NNYNN", vulns: "YYYNNY", fps: "YY" },
    Row { dir: "hawaii",         code: "hi", perms: "YYYYYYYYNNNN", violations: "YYYNN", vulns: "YYNNNY", fps: "YY" },
    Row { dir: "louisiana",      code: "la", perms: "YYYYYYYYNNNN", violations: "YNYNN", vulns: "YYNNNY", fps: "YY" },
    Row { dir: "maryland",       code: "md", perms: "YNYYYNYYNNNN", violations: "YNNYY", vulns: "YYNNNY", fps: "YY" },
    Row { dir: "michigan",       code: "mi", perms: "YNYYYNYYNNNN", violations: "YNNYN", vulns: "NNNNNY", fps: "YY" },
    Row { dir: "minnesota",      code: "mn", perms: "YYYYYYYYNNNN", violations: "NYYYY", vulns: "YYNNNY", fps: "YY" },
    Row { dir: "nevada",         code: "nv", perms: "YNYYYNYYNNYY", violations: "YNNYY", vulns: "YYNYNY", fps: "YY" },
    Row { dir: "new-jersey",     code: "nj", perms: "YYYYYYYYNNNN", violations: "NYNYN", vulns: "NYYNNN", fps: "YY" },
    Row { dir: "new-mexico",     code: "nm", perms: "YNYYYNYYNNYY", violations: "YYNYY", vulns: "YYNYNY", fps: "YY" },
    Row { dir: "new-york",       code: "ny", perms: "YYYYYNYYNNNN", violations: "NYNNN", vulns: "NYYNNN", fps: "YY" },
    Row { dir: "north-carolina", code: "nc", perms: "YNYYYNYYNNNN", violations: "YNYYY", vulns: "NYNNNY", fps: "YY" },
    Row { dir: "north-dakota",   code: "nd", perms: "YNYYYNYYYYNN", violations: "YYNNY", vulns: "NYYNNN", fps: "YY" },
    Row { dir: "pennsylvania",   code: "pa", perms: "YYYYYNYYNNNN", violations: "YYNNN", vulns: "NYYNNN", fps: "YY" },
    Row { dir: "utah",           code: "ut", perms: "YNYYYNYYNNNN", violations: "YNNYN", vulns: "NYNYNY", fps: "YY" },
    Row { dir: "virginia",       code: "va", perms: "YNYYYNYYNNNN", violations: "YNNNN", vulns: "YNNNNY", fps: "NN" },
    Row { dir: "washington",     code: "wa", perms: "YNYYYNYYNNNN", violations: "YNNYY", vulns: "YYNNNY", fps: "YY" },
    Row { dir: "wisconsin",      code: "wi", perms: "YNYYYNYYNNNN", violations: "YNNYY", vulns: "YYNNNY", fps: "YY" },
];

fn flag(s: &str, i: usize) -> bool {
    s.as_bytes()[i] == b'Y'
}

/// Files of one package directory.
#[derive(Default)]
struct Pkg {
    name: String,
    version: usize,
    permissions: Vec<String>,
    queries: Vec<String>,
    backup: Option<bool>,
    components: Vec<String>,
    pins: Vec<String>,
    classes: Vec<(String, String)>,
    strings: Vec<(String, String)>,
    signing: Option<String>,
}

impl Pkg {
    fn new(name: &str, version: usize) -> Self {
        Pkg {
            name: name.to_string(),
            version,
            signing: Some("schemes=v1,v2,v3\ncert.0.subject=CN=Health Department\ncert.0.issuer=CN=Public CA\n".into()),
            ..Default::default()
        }
    }

    fn class(&mut self, simple: &str, header_suffix: &str, methods: &[(&str, &str)]) -> String {
        let full = if simple.contains('.') {
            simple.to_string()
        } else {
            format!("{}.{}", self.name, simple)
        };
        let mut text = format!("class {full}{header_suffix}\n");
        for (sig, body) in methods {
            let _ = writeln!(text, "\nmethod {sig} {{");
            for line in body.lines().filter(|l| !l.trim().is_empty()) {
                let _ = writeln!(text, "  {}", line.trim());
            }
            text.push_str("}\n");
        }
        self.classes.push((full.clone(), text));
        full
    }

    fn component(&mut self, kind: &str, simple: &str, exported: bool, permission: Option<&str>) {
        let mut attrs = format!("android:name=\".{simple}\" android:exported=\"{exported}\"");
        if let Some(p) = permission {
            let _ = write!(attrs, " android:permission=\"{p}\"");
        }
        self.components.push(format!("    <{kind} {attrs}/>"));
    }

    fn manifest(&self) -> String {
        let mut x = String::from("<?xml version=\"1.0\" encoding=\"utf-8\"?>\n");
        let _ = writeln!(
            x,
            "<manifest xmlns:android=\"http://schemas.android.com/apk/res/android\" package=\"{}\" android:versionCode=\"{}\" android:versionName=\"1.{}.0\">",
            self.name, self.version, self.version
        );
        for p in &self.permissions {
            let _ = writeln!(x, "  <uses-permission android:name=\"{p}\"/>");
        }
        if !self.queries.is_empty() {
            x.push_str("  <queries>\n");
            for q in &self.queries {
                let _ = writeln!(x, "    <intent><action android:name=\"{q}\"/></intent>");
            }
            x.push_str("  </queries>\n");
        }
        match self.backup {
            Some(b) => {
                let _ = writeln!(x, "  <application android:allowBackup=\"{b}\">");
            }
            None => x.push_str("  <application>\n"),
        }
        for c in &self.components {
            let _ = writeln!(x, "{c}");
        }
        if !self.pins.is_empty() {
            x.push_str("    <network-security-config>\n      <pin-set>\n");
            for p in &self.pins {
                let _ = writeln!(x, "        {p}");
            }
            x.push_str("      </pin-set>\n    </network-security-config>\n");
        }
        x.push_str("  </application>\n</manifest>\n");
        x
    }

    fn write(&self, dir: &Path) {
        if dir.exists() {
            fs::remove_dir_all(dir).unwrap();
        }
        fs::create_dir_all(dir.join("code")).unwrap();
        fs::write(dir.join("manifest.xml"), self.manifest()).unwrap();
        for (class, text) in &self.classes {
            let simple = class.rsplit('.').next().unwrap();
            fs::write(dir.join("code").join(format!("{simple}.sir")), text).unwrap();
        }
        if let Some(s) = &self.signing {
            fs::write(dir.join("signing.meta"), s).unwrap();
        }
        if !self.strings.is_empty() {
            let body: String = self.strings.iter().map(|(k, v)| format!("{k}={v}\n")).collect();
            fs::write(dir.join("strings.txt"), body).unwrap();
        }
    }
}

/// Every app registers for exposure callbacks through a receiver guarded by
/// the framework permission.
fn exposure_receiver(p: &mut Pkg) {
    p.component("receiver", "ExposureNotificationReceiver", true, Some(GAEN_PERMISSION));
    p.class(
        "ExposureNotificationReceiver",
        "",
        &[(
            "onReceive(2)",
            "r2 = call com.google.android.gms.nearby.exposurenotification.ExposureNotificationClient::getDailySummaries(r0)
             r3 = call java.util.List::size(r2)
             return-void",
        )],
    );
}

fn main_activity(p: &mut Pkg) {
    p.component("activity", "MainActivity", false, None);
    p.class("MainActivity", "", &[("onCreate(1)", "call-void android.app.Activity::setContentView(r0)\nreturn-void")]);
}

fn app(row: &Row, index: usize) -> Pkg {
    let pkg_name = format!("gov.{}.exposure", row.code);
    let mut p = Pkg::new(&pkg_name, index + 1);
    p.permissions = PERMISSIONS
        .iter()
        .enumerate()
        .filter(|(i, _)| flag(row.perms, *i))
        .map(|(_, n)| n.to_string())
        .collect();
    let v = |i| flag(row.violations, i);
    let k = |i| flag(row.vulns, i);
    let f = |i| flag(row.fps, i);

    main_activity(&mut p);
    exposure_receiver(&mut p);

    // Location: a dark-theme helper library that reads the last known location.
    if v(0) {
        p.class(
            "androidx.appcompat.app.TwilightManager",
            " library TwilightManager",
            &[(
                "updateState(0)",
                "r1 = const-string \"passive\"
                 r2 = call android.location.LocationManager::getLastKnownLocation(r1)
                 field-put androidx.appcompat.app.TwilightManager.state, r2
                 return-void",
            )],
        );
    }

    // Exposure data either goes to shared storage or stays internal.
    let (sink, path) = if v(1) {
        ("java.io.ExternalFile::write", "/sdcard/Download/en_exposures.bin")
    } else {
        ("java.io.InternalFile::write", "en_exposures.bin")
    };
    p.class(
        "ExposureStore",
        "",
        &[(
            "persist(1)",
            &format!(
                "r1 = call com.google.android.gms.nearby.exposurenotification.ExposureNotificationClient::getExposureWindows(r0)
                 r2 = const-string \"{path}\"
                 call-void {sink}(r2, r1)
                 return-void"
            ),
        )],
    );

    // Local encryption.
    let transformation = if !v(2) {
        "AES/GCM/NoPadding"
    } else if matches!(row.code, "hi" | "mn") {
        "AES"
    } else {
        "AES/ECB/PKCS5Padding"
    };
    p.class(
        "LocalCrypto",
        "",
        &[(
            "cipher(0)",
            &format!(
                "r1 = const-string \"{transformation}\"
                 r2 = call javax.crypto.Cipher::getInstance(r1)
                 return r2"
            ),
        )],
    );

    // Key server endpoint.
    let country = ["de", "ie", "ca"][index % 3];
    let scheme = if v(3) { "http" } else { "https" };
    let domain = if v(4) { country } else { "org" };
    let url = format!("{scheme}://{}.example.{domain}/v1/diagnosis-keys", row.code);
    let url_operand = if index.is_multiple_of(4) {
        p.strings.push(("key_server_url".into(), url.clone()));
        "@string/key_server_url".to_string()
    } else {
        url.clone()
    };
    let mut client = format!(
        "r1 = const-string \"{url_operand}\"
         r2 = call java.net.URL::new(r1)
         r3 = call java.net.URLConnection::getInputStream(r2)
         return-void"
    );
    if row.code == "az" {
        client = format!(
            "r4 = const-string \"https://analytics.example.net/collect\"
             r5 = call okhttp3.Request$Builder::url(r4)
             {client}"
        );
    }
    p.class("KeyServerClient", "", &[("download(0)", &client)]);

    // Unprotected component: a receiver anyone can trigger that writes preferences.
    if k(0) {
        p.component("receiver", "SyncReceiver", true, None);
        p.class(
            "SyncReceiver",
            "",
            &[(
                "onReceive(2)",
                "r2 = call android.content.Intent::getStringExtra(r1)
                 r3 = call android.content.SharedPreferences::edit(r0)
                 r4 = const-string \"last_sync\"
                 call-void android.content.SharedPreferences$Editor::putString(r4, r2)
                 return-void",
            )],
        );
    }

    // Random identifiers.
    let prng = if k(1) {
        "r1 = call java.util.Random::new()
         r2 = call java.util.Random::nextBytes(r1)
         return r2"
    } else {
        "r1 = call java.security.SecureRandom::new()
         r2 = call java.security.SecureRandom::nextBytes(r1)
         return r2"
    };
    p.class("IdentifierGenerator", "", &[("next(0)", prng)]);

    // Integrity hashing.
    let alg = if !k(2) {
        "SHA-256"
    } else if index.is_multiple_of(2) {
        "MD5"
    } else {
        "SHA-1"
    };
    p.class(
        "Integrity",
        "",
        &[(
            "digest(0)",
            &format!(
                "r1 = const-string \"{alg}\"
                 r2 = call java.security.MessageDigest::getInstance(r1)
                 return r2"
            ),
        )],
    );

    p.backup = match (k(3), row.code) {
        (true, "ut") => None,
        (true, _) => Some(true),
        (false, _) => Some(false),
    };

    // TLS: a trust-all manager or one that defers to the platform validator.
    let trust_body = if k(4) {
        "return-void"
    } else {
        "call-void javax.net.ssl.X509TrustManager::checkServerTrusted(r0, r1)
         return-void"
    };
    p.class("ServerTrustManager", "", &[("checkServerTrusted(2)", trust_body)]);

    // Pinning, in the manifest or through the HTTP client.
    if !k(5) {
        match row.code {
            "az" => p.pins.push(
                "<pin digest=\"SHA-256\" subject=\"CN=az.example.org\" issuer=\"CN=az.example.org\">7HIpactkIAq2Y49orFOOQKurWxmmSFZhBCoQYcRhJ3Y=</pin>".into(),
            ),
            "de" | "ny" => p.pins.push(format!(
                "<pin digest=\"SHA-256\" subject=\"CN={}.example.org\" issuer=\"CN=Public CA\">fwza0LRMXouZHRC8Ei+4PyuldPDcf3UKgO/04cDM1oE=</pin>",
                row.code
            )),
            _ => {
                p.class(
                    "PinnedClient",
                    "",
                    &[(
                        "build(0)",
                        &format!(
                            "r1 = const-string \"{}.example.org\"
                             r2 = const-string \"sha256/fwza0LRMXouZHRC8Ei+4PyuldPDcf3UKgO/04cDM1oE=\"
                             call-void okhttp3.CertificatePinner$Builder::add(r1, r2)
                             return-void",
                            row.code
                        ),
                    )],
                );
            }
        }
    }

    // Constant schema statements.
    if f(0) {
        p.class(
            "ExposureDatabase",
            "",
            &[(
                "onCreate(1)",
                "r1 = const-string \"CREATE TABLE IF NOT EXISTS exposure_windows (id INTEGER PRIMARY KEY, day INTEGER)\"
                 call-void android.database.sqlite.SQLiteDatabase::execSQL(r1)
                 return-void",
            )],
        );
    }

    // Preference and log calls whose constants merely mention keys or passwords.
    let mut settings = String::new();
    if f(1) {
        settings.push_str(
            "r1 = const-string \"api_key_version\"
             r2 = const-string \"2\"
             call-void android.content.SharedPreferences$Editor::putString(r1, r2)\n",
        );
    } else {
        settings.push_str(
            "r1 = const-string \"onboarding_done\"
             r2 = const-string \"true\"
             call-void android.content.SharedPreferences$Editor::putString(r1, r2)\n",
        );
    }
    settings.push_str(
        "r3 = const-string \"Settings\"
         r4 = const-string \"password reset screen opened\"
         call-void android.util.Log::d(r3, r4)
         return-void",
    );
    p.class("Settings", "", &[("save(0)", &settings)]);

    if flag(row.perms, 10) {
        p.class(
            "BiometricLock",
            "",
            &[(
                "unlock(1)",
                "call-void androidx.biometric.BiometricPrompt::authenticate(r0)
                 return-void",
            )],
        );
    }

    if row.code == "az" {
        p.queries = vec!["android.intent.action.DIAL".into(), "android.intent.action.SEND".into()];
    }
    p
}

/// One package per baseline-only finding.
fn false_positive_fixtures() -> Vec<(&'static str, Pkg)> {
    let base = |name: &str| {
        let mut p = Pkg::new(&format!("gov.fp.{}", name.replace('-', "")), 1);
        p.backup = Some(false);
        p.signing = Some("schemes=v2,v3\n".into());
        p.permissions = vec![PERMISSIONS[0].into()];
        p
    };
    let mut out = Vec::new();

    let mut p = base("sql-constant");
    p.class(
        "Db",
        "",
        &[(
            "onCreate(1)",
            "r1 = const-string \"CREATE TABLE t (id INTEGER)\"
             call-void android.database.sqlite.SQLiteDatabase::execSQL(r1)
             return-void",
        )],
    );
    out.push(("sql-constant", p));

    let mut p = base("guarded-component");
    exposure_receiver(&mut p);
    out.push(("guarded-component", p));

    let mut p = base("cleartext-constant");
    p.class(
        "Prefs",
        "",
        &[(
            "save(0)",
            "r1 = const-string \"secret_key_alias\"
             r2 = const-string \"default\"
             call-void android.content.SharedPreferences$Editor::putString(r1, r2)
             return-void",
        )],
    );
    out.push(("cleartext-constant", p));

    let mut p = base("log-constant");
    p.class(
        "Ui",
        "",
        &[(
            "show(0)",
            "r1 = const-string \"Login\"
             r2 = const-string \"username field focused\"
             call-void android.util.Log::i(r1, r2)
             return-void",
        )],
    );
    out.push(("log-constant", p));

    let mut p = base("janus-v1-v2-v3");
    p.signing = Some("schemes=v1,v2,v3\n".into());
    out.push(("janus-v1-v2-v3", p));
    out
}

const CLAIMS: &str = r#"claim C1-no-pii "The app never collects, stores or shares information that identifies you."
claim C2-local-exposure-storage "Exposure information stays on your phone."
claim C3-no-unauthorized-access "Data kept on your phone cannot be read by other apps."
claim C4-encrypts-local "Everything stored on the phone is encrypted."
claim C5-us-encrypted-servers "The app talks only to servers in the United States over encrypted connections."
"#;

const GEO: &str = "# host suffix -> country\nexample.org US\nexample.de DE\nexample.ie IE\nexample.ca CA\n";

fn main() {
    let root: PathBuf = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let corpus = root.join("corpus");
    for (i, row) in ROWS.iter().enumerate() {
        app(row, i).write(&corpus.join(row.dir));
    }
    let fp = root.join("false-positives");
    for (name, p) in false_positive_fixtures() {
        p.write(&fp.join(name));
    }
    fs::write(root.join("claims.txt"), CLAIMS).unwrap();
    fs::write(root.join("geo.txt"), GEO).unwrap();
    println!("wrote {} apps and fixtures under {}", ROWS.len(), root.display());
}
