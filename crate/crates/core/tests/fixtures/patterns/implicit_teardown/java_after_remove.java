import org.junit.After;

public class JavaAfterRemove {
    @After
    public void tearDown() {
        cache.remove("key");
    }
}
