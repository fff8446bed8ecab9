import org.junit.Test;

public class MixedJava {
    @Test
    public void quickPath() {
        assertTrue(cache.isEmpty());
    }

    @Test
    public void slowPath() {
        assertEquals(1, cache.size());
        assertEquals("a", cache.get(0));
        assertNotNull(cache.iterator());
    }
}
